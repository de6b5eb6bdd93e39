"""Semantically augmented labels for hierarchical classification."""

from ._core import (
    SemlabelsError,
    Taxonomy,
    __version__,
    augmented_labels,
    calinski_harabasz,
    heatmap_distance,
    hierarchical_report,
    hierarchy_embedding,
    run_cli,
    s_dbw,
    silhouette,
)

__all__ = [
    "SemlabelsError",
    "Taxonomy",
    "__version__",
    "augmented_labels",
    "calinski_harabasz",
    "heatmap_distance",
    "hierarchical_report",
    "hierarchy_embedding",
    "run_cli",
    "s_dbw",
    "silhouette",
]
