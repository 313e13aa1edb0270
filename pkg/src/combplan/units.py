"""dB / linear / dBm conversion helpers (powers of 10, 1 mW reference)."""

import math


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def dbm_to_watt(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * math.log10(watt / 1e-3)


def inverse_db_sum(*terms_db: float) -> float:
    """Combine SNR-like quantities: 1/total = sum of 1/term (linear units).

    Terms of +inf dB contribute nothing; the result is never above the
    smallest term.
    """
    inv = 0.0
    for t in terms_db:
        if math.isinf(t) and t > 0:
            continue
        inv += db_to_linear(-t)
    if inv == 0.0:
        return math.inf
    return -linear_to_db(inv)
