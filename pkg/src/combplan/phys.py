"""Path-level SNR engine: amplifier ASE, closed-form GN nonlinear interference,
transmit-OSNR bandwidth conversion and configuration feasibility.

Every span's amplifier exactly compensates the span loss. Transmit power
spectral density is constant across symbol rates (0 dBm in 32 GHz), so the
ASE and NLI signal-to-noise ratios of a route are independent of the chosen
configuration; only the transmit-OSNR term scales with symbol rate. NLI is
evaluated with the incoherent closed-form GN model under a fully-loaded
5 THz band, a deterministic worst-case planning margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .netgraph import RoutePath
from .txmodel import AmplifierSpec, DEFAULT_CONSTANTS, PhysicalConstants, ase_noise_power
from .units import db_to_linear, dbm_to_watt, linear_to_db

REFERENCE_SYMBOL_RATE_GBD = 32.0
TOTAL_BAND_HZ = 400 * 12.5e9
SLOT_WIDTH_GHZ = 12.5

MODULATION_BITS = {"QPSK": 2, "16QAM": 4, "64QAM": 6}
SYMBOL_RATES_GBD = (35.0, 70.0, 105.0, 140.0)
FEC_RATE = 0.8
ROLLOFF = 0.05

REQUIRED_SNR_DB = {
    ("QPSK", 35.0): 6.2, ("QPSK", 70.0): 6.7, ("QPSK", 105.0): 7.2, ("QPSK", 140.0): 7.7,
    ("16QAM", 35.0): 13.0, ("16QAM", 70.0): 13.5, ("16QAM", 105.0): 14.0, ("16QAM", 140.0): 14.5,
    ("64QAM", 35.0): 19.1, ("64QAM", 70.0): 19.6, ("64QAM", 105.0): 20.1, ("64QAM", 140.0): 20.6,
}


@dataclass(frozen=True)
class FiberParams:
    attenuation_db_per_km: float = 0.2
    beta2_ps2_per_km: float = -21.7
    gamma_per_w_km: float = 1.3
    span_length_km: float = 80.0
    span_amp_noise_figure_db: float = 5.0

    def __post_init__(self):
        if min(self.attenuation_db_per_km, self.gamma_per_w_km, self.span_length_km) <= 0:
            raise ValueError("attenuation, gamma and span length must be > 0")
        if self.beta2_ps2_per_km == 0:
            raise ValueError("beta2 must be nonzero")


@dataclass(frozen=True)
class TransceiverConfig:
    symbol_rate_gbd: float
    modulation: str
    required_snr_db: float
    channel_spacing_ghz: float
    width_slots: int
    data_rate_gbps: float


def _build_configs() -> tuple[TransceiverConfig, ...]:
    configs = []
    for sr in SYMBOL_RATES_GBD:
        spacing = math.ceil(sr * (1 + ROLLOFF) / SLOT_WIDTH_GHZ) * SLOT_WIDTH_GHZ
        for mod, bits in MODULATION_BITS.items():
            configs.append(TransceiverConfig(
                symbol_rate_gbd=sr,
                modulation=mod,
                required_snr_db=REQUIRED_SNR_DB[(mod, sr)],
                channel_spacing_ghz=spacing,
                width_slots=int(round(spacing / SLOT_WIDTH_GHZ)),
                data_rate_gbps=2 * bits * sr * FEC_RATE,
            ))
    configs.sort(key=lambda c: (-c.data_rate_gbps, c.width_slots, c.modulation))
    return tuple(configs)


CONFIGS: tuple[TransceiverConfig, ...] = _build_configs()


@dataclass(frozen=True)
class SnrBreakdown:
    snr_tx_db: float
    snr_ase_db: float
    snr_nli_db: float
    snr_total_db: float


def launch_power_dbm(sr_gbd: float) -> float:
    """Per-channel launch power keeping PSD constant (0 dBm at 32 GBd)."""
    if sr_gbd <= 0:
        raise ValueError("symbol rate must be > 0")
    return 10.0 * math.log10(sr_gbd / REFERENCE_SYMBOL_RATE_GBD)


def span_lengths_km(length_km: float, fiber: FiberParams) -> list[float]:
    """80 km spans with the remainder as a final short span."""
    full = int(length_km // fiber.span_length_km)
    rest = length_km - full * fiber.span_length_km
    spans = [fiber.span_length_km] * full
    if rest > 1e-9:
        spans.append(rest)
    elif not spans:
        spans.append(length_km)
    return spans


def _route_spans(path: RoutePath, fiber: FiberParams) -> list[float]:
    spans = []
    for length in path.link_lengths_km:
        spans.extend(span_lengths_km(length, fiber))
    return spans


def ase_snr(path: RoutePath, config: TransceiverConfig, fiber: FiberParams,
            consts: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """In-band SNR against accumulated span-amplifier ASE, in dB.

    Constant PSD makes this independent of the configuration's symbol rate;
    the config argument fixes the launch power / bandwidth pair it cancels in.
    """
    spans = _route_spans(path, fiber)
    if not spans:
        raise ValueError("path has no spans")
    amp = AmplifierSpec(noise_figure_db=fiber.span_amp_noise_figure_db)
    noise_ref_w = sum(
        ase_noise_power(2, fiber.attenuation_db_per_km * span, amp, consts)
        for span in spans)
    sr_hz = config.symbol_rate_gbd * 1e9
    noise_inband_w = noise_ref_w * sr_hz / consts.reference_bandwidth_hz
    launch_w = dbm_to_watt(launch_power_dbm(config.symbol_rate_gbd))
    return linear_to_db(launch_w / noise_inband_w)


def gn_nli_snr(path: RoutePath, config: TransceiverConfig, fiber: FiberParams,
               total_band_hz: float = TOTAL_BAND_HZ) -> float:
    """SNR against incoherently accumulated GN-model nonlinear interference, in dB.

    Per span the NLI PSD is (8/27) gamma^2 G^3 L_eff^2
    asinh(pi^2/2 |beta2| L_eff,a B^2) / (pi |beta2| L_eff,a) with G the launch
    PSD and B the fully-loaded band; spans add incoherently.
    """
    spans = _route_spans(path, fiber)
    if not spans:
        raise ValueError("path has no spans")
    two_alpha = fiber.attenuation_db_per_km * math.log(10) / 10.0 / 1e3
    l_eff_a = 1.0 / two_alpha
    beta2 = abs(fiber.beta2_ps2_per_km) * 1e-27
    gamma = fiber.gamma_per_w_km * 1e-3
    sr_hz = config.symbol_rate_gbd * 1e9
    psd = dbm_to_watt(launch_power_dbm(config.symbol_rate_gbd)) / sr_hz

    asinh_term = math.asinh((math.pi ** 2 / 2.0) * beta2 * l_eff_a * total_band_hz ** 2)
    nli_psd = 0.0
    for span in spans:
        l_eff = (1.0 - math.exp(-two_alpha * span * 1e3)) / two_alpha
        nli_psd += ((8.0 / 27.0) * gamma ** 2 * psd ** 3 * l_eff ** 2
                    * asinh_term / (math.pi * beta2 * l_eff_a))
    nli_w = nli_psd * sr_hz
    launch_w = psd * sr_hz
    return linear_to_db(launch_w / nli_w)


def route_snr_terms(path: RoutePath, fiber: FiberParams,
                    consts: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    """(ASE SNR, NLI SNR) of a route in dB, valid for every configuration."""
    ref = TransceiverConfig(REFERENCE_SYMBOL_RATE_GBD, "QPSK", 0.0, 37.5, 3,
                            2 * 2 * REFERENCE_SYMBOL_RATE_GBD * FEC_RATE)
    return (ase_snr(path, ref, fiber, consts), gn_nli_snr(path, ref, fiber))


def snr_tx_db_for(osnr_tx_db: float, sr_gbd: float,
                  consts: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Convert transmit OSNR (12.5 GHz reference) to in-band SNR at the symbol rate."""
    if math.isinf(osnr_tx_db):
        return math.inf
    return osnr_tx_db - 10.0 * math.log10(sr_gbd * 1e9 / consts.reference_bandwidth_hz)


def _total_snr_db(snr_tx_db: float, snr_ase_db: float, snr_nli_db: float | None) -> float:
    inv = 0.0
    for term in (snr_tx_db, snr_ase_db, snr_nli_db):
        if term is None or math.isinf(term):
            continue
        inv += db_to_linear(-term)
    return math.inf if inv == 0 else -linear_to_db(inv)


def path_snr(path: RoutePath, config: TransceiverConfig, osnr_tx_db: float,
             fiber: FiberParams,
             consts: PhysicalConstants = DEFAULT_CONSTANTS) -> SnrBreakdown:
    """Full SNR breakdown (transmit, ASE, NLI, inverse-linear total) for one config."""
    snr_tx = snr_tx_db_for(osnr_tx_db, config.symbol_rate_gbd, consts)
    snr_ase = ase_snr(path, config, fiber, consts)
    snr_nli = gn_nli_snr(path, config, fiber)
    return SnrBreakdown(snr_tx_db=snr_tx, snr_ase_db=snr_ase, snr_nli_db=snr_nli,
                        snr_total_db=_total_snr_db(snr_tx, snr_ase, snr_nli))


LINEAR_ONLY = "linear_only"
FULL = "full"


def feasible_configs(path: RoutePath, osnr_tx_db: float, fiber: FiberParams,
                     mode: str = FULL,
                     route_terms: tuple[float, float] | None = None,
                     consts: PhysicalConstants = DEFAULT_CONSTANTS) -> list[TransceiverConfig]:
    """Configs whose required SNR is met on this path, best data rate first.

    linear_only mode ignores the NLI term (candidate selection); full mode is
    the verification criterion. Ties in data rate resolve to the narrower
    config. Precomputed route_terms may be passed to avoid recomputation.
    """
    if mode not in (LINEAR_ONLY, FULL):
        raise ValueError(f"unknown mode {mode!r}")
    ase_db, nli_db = route_terms if route_terms is not None else route_snr_terms(path, fiber, consts)
    out = []
    for config in CONFIGS:
        snr_tx = snr_tx_db_for(osnr_tx_db, config.symbol_rate_gbd, consts)
        total = _total_snr_db(snr_tx, ase_db, nli_db if mode == FULL else None)
        if total >= config.required_snr_db:
            out.append(config)
    return out
