# METARX Channel Module
from .models import (
    ChannelConfig,
    DimensionMismatchError,
    MimoChannelSpec,
    Nonlinearity,
    exp_decay_matrix,
    mimo_transmit,
    siso_noiseless,
    siso_transmit,
    snr_to_sigma,
)
from .profiles import (
    TapProfile,
    TapSpec,
    default_tap_spec,
    modulated_mimo_channel,
    random_tap_profile,
    synth_tap_profile,
    trace_mimo_channel,
)
from .theory import bpsk_awgn_ber
from .trace_io import TraceParseError, load_tap_trace, save_tap_trace

__all__ = [
    "ChannelConfig",
    "DimensionMismatchError",
    "MimoChannelSpec",
    "Nonlinearity",
    "exp_decay_matrix",
    "mimo_transmit",
    "siso_noiseless",
    "siso_transmit",
    "snr_to_sigma",
    "TapProfile",
    "TapSpec",
    "default_tap_spec",
    "modulated_mimo_channel",
    "random_tap_profile",
    "synth_tap_profile",
    "trace_mimo_channel",
    "bpsk_awgn_ber",
    "TraceParseError",
    "load_tap_trace",
    "save_tap_trace",
]
