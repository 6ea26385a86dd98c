"""histoblend: desk-scale workbench for explaining tissue-image classifiers
with class-conditional synthetic imagery.

Core pieces: deterministic seeds and class-embedding schedules (latent), a
fully analytic toy generator/classifier pair plus a wire protocol for real
models (backend, wire), tiling and QC (imaging), concordance screening
(concordance), class and layer blending (blendlab), evaluation statistics
(metrics), pre/post test assembly (curriculum), and an HTTP studio service
with a CLI (service, cli).
"""

from .backend import (
    BackendDescriptor,
    Prediction,
    Provenance,
    SyntheticImage,
    ToyBackend,
    generate_and_classify,
)
from .blendlab import BlendTrace, LayerBlendCell, blend_sequence, fig3_grid, layer_blend
from .concordance import (
    Bucket,
    ConcordanceRecord,
    ScreeningSummary,
    Strength,
    Thresholds,
    assess_seed,
    predicted_class,
    screen,
    strength,
)
from .config import ProjectConfig, load_config, make_backend, resolve_embeddings, save_config
from .curriculum import (
    CaseRecord,
    ScoreSheet,
    TestItem,
    TestPaper,
    analyze_improvement,
    build_test,
    score_test,
    stratify_tiles,
)
from .imaging import (
    QCParams,
    QCReport,
    SlideRaster,
    TileSpec,
    center_crop_resize,
    gaussian_blur,
    merge_trio,
    otsu_threshold,
    qc_tile,
    tile_grid,
    to_grayscale,
)
from .latent import (
    ClassEmbedding,
    ConditioningSchedule,
    EmbeddingSet,
    blend_embeddings,
    layer_schedule,
    load_embeddings,
    save_embeddings,
    seed_to_latent,
    uniform_schedule,
)
from .metrics import (
    GaussianMoments,
    auroc,
    frechet_distance,
    gaussian_moments,
    mean_sd,
    paired_t_one_sided,
)

__version__ = "0.1.0"
