"""Link-level simulator for protocol-aware jamming of the LTE downlink."""

from .cell_model import (
    CellConfig,
    Channel,
    ChannelMask,
    OccupancyConvention,
    ReCoordinate,
    build_channel_mask,
    crs_subcarrier_offset,
    grid_dimensions,
    occupancy_fraction,
)
from .errors import FramingError
from .experiment import ExperimentResult, ExperimentSpec, bandwidth_analysis, emit_results, run_experiment
from .interference import JammerProfile, Strategy, SyncMode, make_async_waveform, make_sync_waveform, mix_at_jsr
from .metrics import (
    DosAssessment,
    MetricsPoint,
    default_thresholds,
    dos_threshold,
    error_rate,
    jsr_f,
    jsr_n,
    scale_jsr_to_bandwidth,
)
from .ofdm import ofdm_demodulate, ofdm_modulate
from .receiver import ErrorFlags, evaluate_strategy_flag, receive_frame
from .sequences import generate_crs, generate_pss, generate_sss
from .sync import SyncResult, acquire_sync
from .tx import (
    FramePayload,
    PowerProfile,
    ResourceGrid,
    build_frame,
    encode_pbch,
    encode_pcfich,
    encode_pdcch,
)

__version__ = "0.1.0"
