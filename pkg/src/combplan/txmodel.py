"""Transmit-side OSNR budgets for single- and multi-wavelength-source transmitters.

A single-wavelength source (SWS) feeds one modulator directly; the booster
amplifier (BA) after the multiplexer lifts the channel to its launch power.
A multi-wavelength source (MWS, an optical frequency comb) needs an extra comb
amplifier (CA) stage, either one shared amplifier ahead of the demultiplexer
(joint amplification, output-power limited) or one amplifier per line after it
(per-line amplification, unlimited but costlier). OSNR contributions of the
seed source (OCNR), the CA and the BA combine inverse-linearly into the
transmit OSNR, all referenced to 12.5 GHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .units import db_to_linear, inverse_db_sum, watt_to_dbm

SWS = "sws"
MWS = "mws"
JOINT_AMPLIFICATION = "joint_amplification"
PER_LINE_AMPLIFICATION = "per_line_amplification"
FIXED_FSR = "fixed"
FLEXIBLE_FSR = "flexible"


@dataclass(frozen=True)
class PhysicalConstants:
    planck_j_s: float = 6.62607015e-34
    reference_bandwidth_hz: float = 12.5e9
    carrier_frequency_hz: float = 193.4e12

    def __post_init__(self):
        if min(self.planck_j_s, self.reference_bandwidth_hz, self.carrier_frequency_hz) <= 0:
            raise ValueError("physical constants must be strictly positive")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class AmplifierSpec:
    noise_figure_db: float = 5.0
    max_output_power_dbm: float = math.inf

    def __post_init__(self):
        if self.noise_figure_db <= 0:
            raise ValueError(f"noise figure must be > 0 dB, got {self.noise_figure_db}")


def comb_amplifier() -> AmplifierSpec:
    """EDFA used as CA: 5 dB noise figure, 26 dBm total output limit."""
    return AmplifierSpec(noise_figure_db=5.0, max_output_power_dbm=26.0)


def booster_amplifier() -> AmplifierSpec:
    """EDFA used as BA: 5 dB noise figure, output power unbounded."""
    return AmplifierSpec(noise_figure_db=5.0, max_output_power_dbm=math.inf)


@dataclass(frozen=True)
class LossBudget:
    modulator_chain_loss_db: float = 23.0
    mux_loss_db: float = 5.0
    modulation_loss_db: float = 5.0
    demux_loss_db: float = 5.0

    def __post_init__(self):
        if min(self.modulator_chain_loss_db, self.mux_loss_db,
               self.modulation_loss_db, self.demux_loss_db) < 0:
            raise ValueError("losses must be non-negative")

    @property
    def post_modulator_input_loss_db(self) -> float:
        """Loss between the modulator input and the BA input (33 dB reference chain)."""
        return self.modulator_chain_loss_db + self.modulation_loss_db + self.mux_loss_db


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    ocnr_db: float
    n_lines: int = 1
    p_out_dbm: float = 16.0
    p_line_dbm: float | None = None
    fsr_mode: str | None = None
    architecture: str | None = None

    def __post_init__(self):
        if self.kind not in (SWS, MWS):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.n_lines < 1:
            raise ValueError("n_lines must be >= 1")
        if math.isnan(self.ocnr_db) or self.ocnr_db <= 0:
            raise ValueError("OCNR must be positive in dB")
        if self.kind == SWS and self.n_lines != 1:
            raise ValueError("an SWS has exactly one line")
        if self.kind == MWS:
            if self.p_line_dbm is None:
                raise ValueError("an MWS needs a per-line power")
            if self.architecture not in (JOINT_AMPLIFICATION, PER_LINE_AMPLIFICATION):
                raise ValueError(f"unknown MWS architecture {self.architecture!r}")


def sws_source(ocnr_db: float = 55.0, p_out_dbm: float = 16.0) -> SourceSpec:
    return SourceSpec(kind=SWS, ocnr_db=ocnr_db, p_out_dbm=p_out_dbm)


def mws_source(architecture: str, n_lines: int, ocnr_db: float = 45.0,
               p_line_dbm: float = -10.0, p_out_dbm: float = 16.0,
               fsr_mode: str = FLEXIBLE_FSR) -> SourceSpec:
    return SourceSpec(kind=MWS, ocnr_db=ocnr_db, n_lines=n_lines,
                      p_out_dbm=p_out_dbm, p_line_dbm=p_line_dbm,
                      fsr_mode=fsr_mode, architecture=architecture)


@dataclass(frozen=True)
class TxBudgetResult:
    osnr_tx_db: float
    g_ca_db: float
    g_ba_db: float
    ca_output_total_dbm: float
    clamped: bool
    osnr_contributions_db: dict = field(default_factory=dict)


def ase_noise_power(p: int, gain_db: float, amp: AmplifierSpec,
                    consts: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """ASE power in watts added by one amplifier, in the reference bandwidth.

    p is the number of polarization states the noise is counted in (1 when the
    modulator acts as a polarizer, 2 for the dual-polarized case).
    """
    if gain_db < 0:
        raise ValueError(f"amplifier gain must be >= 0 dB, got {gain_db}")
    if p not in (1, 2):
        raise ValueError("polarization count must be 1 or 2")
    g = db_to_linear(gain_db)
    f_n = db_to_linear(amp.noise_figure_db)
    return (p * consts.planck_j_s * consts.carrier_frequency_hz
            * consts.reference_bandwidth_hz * f_n * (g - 1.0) / 2.0)


def ca_gain(p_out_dbm: float, p_line_dbm: float, demux_loss_db: float) -> float:
    """Unclamped CA gain that reaches the target per-line modulator input power."""
    return p_out_dbm - (p_line_dbm - demux_loss_db)


def ca_total_output(p_line_dbm: float, g_ca_db: float, n_lines: int) -> float:
    """Total output power of a CA amplifying n_lines lines of equal power."""
    if n_lines < 1:
        raise ValueError("n_lines must be >= 1")
    return (p_line_dbm + g_ca_db) + 10.0 * math.log10(n_lines)


def clamp_ca_gain(g_ca_db: float, p_line_dbm: float, n_lines: int,
                  max_out_dbm: float) -> tuple[float, bool]:
    """Reduce the joint-CA gain so the total output stays at or below the limit."""
    total = ca_total_output(p_line_dbm, g_ca_db, n_lines)
    if total <= max_out_dbm:
        return g_ca_db, False
    return max_out_dbm - p_line_dbm - 10.0 * math.log10(n_lines), True


def tx_osnr(source: SourceSpec,
            losses: LossBudget | None = None,
            ca: AmplifierSpec | None = None,
            ba: AmplifierSpec | None = None,
            launch_per_channel_dbm: float = 0.0,
            consts: PhysicalConstants = DEFAULT_CONSTANTS) -> TxBudgetResult:
    """Transmit OSNR of one channel for the given source and loss chain.

    The CA stage only exists for MWS sources. Joint amplification places the
    CA ahead of the demultiplexer and clamps its gain to the output-power
    limit; per-line amplification feeds each line through the demultiplexer
    first and always reaches the target modulator input power. CA noise is
    counted co-polarized (p=1), BA noise dual-polarized (p=2). Each OSNR
    contribution is referenced where the noise is injected; downstream
    gain/loss cancels in the ratio.
    """
    losses = losses if losses is not None else LossBudget()
    ca = ca if ca is not None else comb_amplifier()
    ba = ba if ba is not None else booster_amplifier()

    contributions = {"ocnr": source.ocnr_db}
    g_ca = 0.0
    clamped = False
    ca_out_total = math.nan

    if source.kind == SWS:
        modulator_input_dbm = source.p_out_dbm
    else:
        g_ca = ca_gain(source.p_out_dbm, source.p_line_dbm, losses.demux_loss_db)
        if g_ca < 0:
            raise ConfigurationError(
                f"required CA gain {g_ca:.2f} dB is negative: source too powerful "
                "for the loss chain")
        if source.architecture == JOINT_AMPLIFICATION:
            g_ca, clamped = clamp_ca_gain(g_ca, source.p_line_dbm, source.n_lines,
                                          ca.max_output_power_dbm)
            ca_out_total = ca_total_output(source.p_line_dbm, g_ca, source.n_lines)
            signal_at_ca_out_dbm = source.p_line_dbm + g_ca
            modulator_input_dbm = signal_at_ca_out_dbm - losses.demux_loss_db
        else:
            ca_out_total = source.p_out_dbm
            signal_at_ca_out_dbm = source.p_out_dbm
            modulator_input_dbm = source.p_out_dbm
        ca_noise_w = ase_noise_power(1, g_ca, ca, consts)
        if ca_noise_w > 0:
            contributions["ca"] = signal_at_ca_out_dbm - watt_to_dbm(ca_noise_w)
        else:
            contributions["ca"] = math.inf

    g_ba = launch_per_channel_dbm - (modulator_input_dbm - losses.post_modulator_input_loss_db)
    if g_ba < 0:
        raise ConfigurationError(
            f"required BA gain {g_ba:.2f} dB is negative: source too powerful "
            "for the loss chain")
    ba_noise_w = ase_noise_power(2, g_ba, ba, consts)
    if ba_noise_w > 0:
        contributions["ba"] = launch_per_channel_dbm - watt_to_dbm(ba_noise_w)
    else:
        contributions["ba"] = math.inf

    osnr = inverse_db_sum(*contributions.values())
    return TxBudgetResult(osnr_tx_db=osnr, g_ca_db=g_ca, g_ba_db=g_ba,
                          ca_output_total_dbm=ca_out_total, clamped=clamped,
                          osnr_contributions_db=contributions)


@dataclass(frozen=True)
class SweepPoint:
    x_variable: str
    x_value: float
    architecture: str
    n_lines: int
    osnr_tx_db: float
    clamped: bool


DEFAULT_SWEEP_VARIANTS = (
    (JOINT_AMPLIFICATION, 4),
    (JOINT_AMPLIFICATION, 8),
    (PER_LINE_AMPLIFICATION, 4),
    (PER_LINE_AMPLIFICATION, 8),
)


def sweep_tx_osnr(sweep_variable: str, start: float, stop: float, step: float,
                  variants=DEFAULT_SWEEP_VARIANTS,
                  ocnr_db: float = 45.0, p_line_dbm: float = -10.0,
                  sws_ocnr_db: float = 55.0, sws_p_out_dbm: float = 16.0,
                  losses: LossBudget | None = None,
                  launch_per_channel_dbm: float = 0.0,
                  consts: PhysicalConstants = DEFAULT_CONSTANTS) -> list[SweepPoint]:
    """Sweep OSNR_TX over per-line power or OCNR for each MWS variant.

    Emits one curve per (architecture, n_lines) variant plus the constant SWS
    reference line. Points where the loss chain rejects the configuration are
    skipped.
    """
    if sweep_variable not in ("p_line_dbm", "ocnr_db"):
        raise ValueError(f"unknown sweep variable {sweep_variable!r}")
    if step <= 0:
        raise ValueError("step must be > 0")
    if stop < start:
        raise ValueError("empty sweep range")

    xs = []
    x = start
    while x <= stop + 1e-9:
        xs.append(round(x, 9))
        x += step

    sws_result = tx_osnr(sws_source(sws_ocnr_db, sws_p_out_dbm), losses=losses,
                         launch_per_channel_dbm=launch_per_channel_dbm, consts=consts)
    points = []
    for x in xs:
        points.append(SweepPoint(sweep_variable, x, SWS, 1,
                                 sws_result.osnr_tx_db, False))
        for arch, n_lines in variants:
            kwargs = {"ocnr_db": ocnr_db, "p_line_dbm": p_line_dbm}
            kwargs[sweep_variable] = x
            src = mws_source(arch, n_lines, **kwargs)
            try:
                res = tx_osnr(src, losses=losses,
                              launch_per_channel_dbm=launch_per_channel_dbm,
                              consts=consts)
            except ConfigurationError:
                continue
            points.append(SweepPoint(sweep_variable, x, arch, n_lines,
                                     res.osnr_tx_db, res.clamped))
    return points
