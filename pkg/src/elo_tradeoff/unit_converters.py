"""
Converters between logarithmic and linear units.

All model computation runs in SI units (bits, Hz, W, s, J). Values quoted
in dB or dBm are converted exactly once, when a configuration is parsed.
"""

import math


def db_to_linear(value_db: float) -> float:
    """
    Convert a power ratio in dB to a linear ratio.

    Args:
        value_db: Ratio in decibels (e.g. the Friis parameter K0 = -27 dB)

    Returns:
        Linear ratio 10^(value_db/10)

    Example:
        >>> db_to_linear(-27.0)  # 10**-2.7
        0.001995262314968879
    """
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a positive linear power ratio to dB."""
    if value <= 0.0:
        raise ValueError(f"Cannot express non-positive ratio {value!r} in dB")
    return 10.0 * math.log10(value)


def dbm_to_watt(value_dbm: float) -> float:
    """
    Convert a power (or power spectral density) in dBm to W.

    Args:
        value_dbm: Power in dBm, or PSD in dBm/Hz

    Returns:
        Power in W (or W/Hz): 10^((value_dbm - 30)/10)

    Example:
        >>> dbm_to_watt(-110.0)  # noise PSD of -110 dBm/Hz
        1e-14
    """
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watt_to_dbm(value_w: float) -> float:
    """Convert a positive power in W (or W/Hz) to dBm (or dBm/Hz)."""
    if value_w <= 0.0:
        raise ValueError(f"Cannot express non-positive power {value_w!r} in dBm")
    return 10.0 * math.log10(value_w) + 30.0
