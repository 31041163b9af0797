"""Monostatic OFDM integrated-sensing-and-communications simulator.

Random communication frames double as radar waveforms: the receiver matched-
filters the frequency-domain echo, forms a range-Doppler matrix, refines
detected peaks off-grid, and optionally cancels each target's full footprint
(including modulation-induced interference) to recover weak targets. A
Monte-Carlo harness scores per-target distance/velocity MSE against the
Cramer-Rao bound.
"""

from .channel import (
    ReceiveFrame,
    Reflection,
    ScatteringParams,
    TargetTruth,
    apply_channel,
    expand_scattering,
    reflections_from_targets,
    synthesize_channel,
    time_domain_oracle,
)
from .errors import ConfigError, ScenarioInfeasibleError
from .estimate import (
    CfarParams,
    Detection,
    TargetEstimate,
    bins_from_physical,
    crb,
    detect_cfar,
    detect_max,
    refine_peak,
    to_physical,
)
from .frame import (
    FrameConfig,
    ModulationAlphabet,
    SymbolFrame,
    draw_frame,
    kurtosis,
    make_alphabet,
)
from .harness import (
    MseReport,
    ScenarioConfig,
    SceneSpec,
    TrialResult,
    aggregate,
    associate,
    generate_scene,
    run_simulation,
    run_trial,
)
from .mitigate import InterferenceTemplate, MitigationReport, cstc, ecstc, synth_target_rdm
from .rdm import compute_rdm, dtft_point, matched_filter
from .rng import make_rng

__version__ = "0.1.0"
