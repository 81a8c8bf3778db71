"""Physical channel models for the FSO and RF links.

Computes the modulation switching threshold, Gamma-Gamma scintillation
parameters with Gaussian pointing error, average SNR budgets, and the
per-step outage probabilities

    a = Pr[FSO link below threshold],   b = Pr[RF link below threshold].

All SNR values are linear inside this module; dB appears only at I/O
boundaries (config file, CLI output).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erf, gammainc, gammaincc, gammaincinv, gammaln

from .errors import NumericError, ValidationError

SPEED_OF_LIGHT = 299792458.0  # m/s


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class FsoParams:
    """FSO subsystem link-budget parameters (SI units)."""

    wavelength_m: float
    lo_power_W: float
    shot_noise_var: float
    responsivity_A_per_W: float
    detector_diameter_m: float
    tx_power_W: float
    divergence_rad: float
    jitter_std_m: float
    link_distance_m: float
    cn2: float                      # refractive-index structure parameter, m^(-2/3)
    weather_atten_dB_per_km: float
    avg_symbol_energy: float = 1.0

    def __post_init__(self):
        positive = [
            ("wavelength_m", self.wavelength_m),
            ("lo_power_W", self.lo_power_W),
            ("shot_noise_var", self.shot_noise_var),
            ("responsivity_A_per_W", self.responsivity_A_per_W),
            ("detector_diameter_m", self.detector_diameter_m),
            ("tx_power_W", self.tx_power_W),
            ("divergence_rad", self.divergence_rad),
            ("jitter_std_m", self.jitter_std_m),
            ("link_distance_m", self.link_distance_m),
            ("avg_symbol_energy", self.avg_symbol_energy),
        ]
        for name, val in positive:
            if not (val > 0.0 and math.isfinite(val)):
                raise ValidationError(f"FsoParams.{name} must be strictly positive, got {val}")
        if not 100e-9 < self.wavelength_m < 10e-6:
            raise ValidationError(
                f"FsoParams.wavelength_m out of optical range (100 nm, 10 um): {self.wavelength_m}")
        if self.cn2 <= 0.0:
            # cn2 = 0 sends the scintillation shapes to infinity
            raise ValidationError("FsoParams.cn2 must be > 0")
        if self.weather_atten_dB_per_km < 0.0:
            raise ValidationError("FsoParams.weather_atten_dB_per_km must be >= 0")


@dataclass(frozen=True)
class RfParams:
    """RF subsystem link-budget parameters. Gains and noise PSD in dB units."""

    carrier_hz: float
    bandwidth_hz: float
    tx_power_W: float
    tx_gain_dBi: float
    rx_gain_dBi: float
    noise_psd_dBm_per_MHz: float
    noise_figure_dB: float
    oxygen_atten_dB_per_km: float
    rain_atten_dB_per_km: float
    nakagami_m: float
    link_distance_m: float
    avg_symbol_energy: float = 1.0

    def __post_init__(self):
        if self.nakagami_m < 0.5:
            raise ValidationError(f"RfParams.nakagami_m must be >= 0.5, got {self.nakagami_m}")
        if self.bandwidth_hz <= 0.0:
            raise ValidationError("RfParams.bandwidth_hz must be > 0")
        for name in ("carrier_hz", "tx_power_W", "link_distance_m", "avg_symbol_energy"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"RfParams.{name} must be > 0")
        for name in ("tx_gain_dBi", "rx_gain_dBi", "noise_psd_dBm_per_MHz", "noise_figure_dB",
                     "oxygen_atten_dB_per_km", "rain_atten_dB_per_km"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"RfParams.{name} must be finite")


@dataclass(frozen=True)
class ScintillationParams:
    """Gamma-Gamma shape parameters and pointing-error geometry."""

    alpha: float
    beta: float
    xi: float          # ratio of equivalent beam radius to 2x jitter std
    rytov_var: float
    d_param: float
    w_eq_m: float
    w_z_m: float

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0 or self.xi <= 0.0:
            raise ValidationError(
                f"scintillation shapes must be positive: alpha={self.alpha} "
                f"beta={self.beta} xi={self.xi}")
        if self.rytov_var < 0.0:
            raise ValidationError("rytov_var must be >= 0")


@dataclass(frozen=True)
class LinkState:
    """Derived link-quality summary consumed by the queueing layer."""

    a: float             # Pr[FSO poor]
    b: float             # Pr[RF poor]
    gamma_T: float       # switching threshold, linear SNR
    avg_snr_fso: float   # linear
    avg_snr_rf: float    # linear

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValidationError(f"LinkState.a must be in [0,1], got {self.a}")
        if not 0.0 <= self.b <= 1.0:
            raise ValidationError(f"LinkState.b must be in [0,1], got {self.b}")
        if not self.gamma_T > 0.0:
            raise ValidationError(f"LinkState.gamma_T must be > 0, got {self.gamma_T}")


def switching_threshold(modulation_order: int, ber0: float) -> float:
    """Minimum per-symbol SNR (linear) keeping square M-QAM at the target BER.

    gamma_T = (M - 1) * [-(2/3) ln(5 BER0)], valid for square QAM (M = 4^k).
    """
    m = int(modulation_order)
    if m < 4:
        raise ValidationError(f"modulation order must be >= 4, got {modulation_order}")
    k = round(math.log(m, 4))
    if 4 ** k != m:
        raise ValidationError(f"modulation order must be a power of 4 (square QAM), got {m}")
    if not 0.0 < ber0 < 0.2:
        # ln(5 * 0.2) = 0: the threshold degenerates at 0.2 and flips sign above
        raise ValidationError(f"target BER must lie in (0, 0.2), got {ber0}")
    return (m - 1) * (-(2.0 / 3.0) * math.log(5.0 * ber0))


def scintillation(fso: FsoParams) -> ScintillationParams:
    """Spherical-wave Gamma-Gamma shapes and pointing-error ratio from geometry.

    Rytov variance chi^2 = 0.5 Cn2 k^(7/6) z^(11/6) with k = 2 pi / lambda;
    aperture parameter d = sqrt(k D^2 / 4z). The equivalent beam radius
    follows from the error-function beam-collection model and xi = w_eq / (2 sigma_s).
    """
    k = 2.0 * math.pi / fso.wavelength_m
    z = fso.link_distance_m
    d_big = fso.detector_diameter_m
    chi2 = 0.5 * fso.cn2 * k ** (7.0 / 6.0) * z ** (11.0 / 6.0)
    d = math.sqrt(k * d_big ** 2 / (4.0 * z))
    chi_125 = chi2 ** (6.0 / 5.0)  # chi^(12/5)
    alpha = 1.0 / math.expm1(
        0.49 * chi2 / (1.0 + 0.18 * d * d + 0.56 * chi_125) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(
        0.51 * chi2 * (1.0 + 0.69 * chi_125) ** (-5.0 / 6.0)
        / (1.0 + 0.9 * d * d + 0.62 * d * d * chi_125) ** (5.0 / 6.0))
    w_z = fso.divergence_rad * z
    nu = math.sqrt(math.pi) * d_big / (2.0 * math.sqrt(2.0) * w_z)
    w_eq2 = w_z ** 2 * math.sqrt(math.pi) * erf(nu) / (2.0 * nu * math.exp(-nu * nu))
    xi = math.sqrt(w_eq2) / (2.0 * fso.jitter_std_m)
    return ScintillationParams(alpha=alpha, beta=beta, xi=xi, rytov_var=chi2,
                               d_param=d, w_eq_m=math.sqrt(w_eq2), w_z_m=w_z)


def fso_avg_snr(fso: FsoParams) -> float:
    """Average heterodyne FSO SNR (linear) with Beers-Lambert weather loss."""
    atten_db = fso.weather_atten_dB_per_km * fso.link_distance_m / 1000.0
    g_fso = db_to_linear(-atten_db)
    return (2.0 * fso.avg_symbol_energy * fso.responsivity_A_per_W ** 2
            * fso.lo_power_W * fso.tx_power_W * g_fso / fso.shot_noise_var)


def rf_avg_snr(rf: RfParams) -> float:
    """Average RF SNR (linear) from a Friis budget.

    G_RF(dB) = G_T + G_R - 20 log10(4 pi z / lambda_RF) - (alpha_oxy + alpha_rain) z_km,
    noise variance sigma^2 = W N0 NF in consistent linear units.
    """
    lam = SPEED_OF_LIGHT / rf.carrier_hz
    z = rf.link_distance_m
    fspl_db = 20.0 * math.log10(4.0 * math.pi * z / lam)
    atten_db = (rf.oxygen_atten_dB_per_km + rf.rain_atten_dB_per_km) * z / 1000.0
    g_rf_db = rf.tx_gain_dBi + rf.rx_gain_dBi - fspl_db - atten_db
    noise_dbm = rf.noise_psd_dBm_per_MHz + 10.0 * math.log10(rf.bandwidth_hz / 1e6) \
        + rf.noise_figure_dB
    noise_w = dbm_to_watts(noise_dbm)
    return rf.avg_symbol_energy * rf.tx_power_W * db_to_linear(g_rf_db) / noise_w


def _upper_gamma_over_gamma_beta(s: float, x: float, lgamma_beta: float) -> float:
    """log( Gamma(s, x) / Gamma(beta) ) for real s, including s <= 0.

    For positive s this is the regularized upper tail rescaled; for s <= 0
    (severe pointing error, xi^2 >= beta) the tail integral is evaluated
    directly, which stays finite for x > 0.
    """
    if s > 1e-8:
        q = gammaincc(s, x)
        if q <= 0.0:
            return -math.inf
        return math.log(q) + gammaln(s) - lgamma_beta
    val, _ = integrate.quad(lambda u: u ** (s - 1.0) * math.exp(-u), x, np.inf, limit=200)
    if val <= 0.0:
        return -math.inf
    return math.log(val) - lgamma_beta


def _pointing_tail_given_product(t: float, beta: float, xi2: float,
                                 lgamma_beta: float) -> float:
    """E_Y[min(1, (t/Y)^xi2)] for Y ~ Gamma(beta, 1/beta).

    Closed form: P(beta, beta t) + (beta t)^xi2 Gamma(beta - xi2, beta t) / Gamma(beta).
    """
    if t <= 0.0:
        return 0.0
    x = beta * t
    first = gammainc(beta, x)
    lg = _upper_gamma_over_gamma_beta(beta - xi2, x, lgamma_beta)
    second = 0.0 if lg == -math.inf else math.exp(xi2 * math.log(x) + lg)
    return min(1.0, first + second)


def fso_outage_prob(scint: ScintillationParams, avg_snr: float, gamma_t: float) -> float:
    """Outage probability of the composite Gamma-Gamma + pointing-error SNR.

    The composite SNR factorizes as gamma = avg_snr (xi^2+1)/xi^2 * X * Y * V with
    X ~ Gamma(alpha, 1/alpha), Y ~ Gamma(beta, 1/beta) and pointing loss
    V = U^(1/xi^2). Since Pr[V < c] = min(1, c^xi2),

        a = E_{X,Y}[min(1, (z0 / (X Y))^xi2)],  z0 = xi^2 gamma_t / ((xi^2+1) avg_snr),

    which is evaluated by adaptive quadrature over the Gamma(alpha) probability
    scale with the Y-expectation in closed form. No Meijer-G routine required.
    """
    if avg_snr <= 0.0:
        raise ValidationError(f"avg_snr must be > 0, got {avg_snr}")
    if gamma_t <= 0.0:
        return 0.0
    alpha, beta, xi2 = scint.alpha, scint.beta, scint.xi ** 2
    z0 = xi2 * gamma_t / ((xi2 + 1.0) * avg_snr)
    lgb = gammaln(beta)

    def integrand(q: float) -> float:
        x = gammaincinv(alpha, q) / alpha
        if x <= 0.0:
            return 1.0
        return _pointing_tail_given_product(z0 / x, beta, xi2, lgb)

    val, err, info, *rest = integrate.quad(
        integrand, 0.0, 1.0, limit=200, epsabs=1e-11, epsrel=1e-9, full_output=True)
    if rest:
        # scipy appends a message (and possibly more) when the integrator struggles
        raise NumericError(
            f"FSO outage quadrature did not converge: {rest[0]} (estimate {val}, error {err})")
    if err > 1e-6:
        raise NumericError(
            f"FSO outage quadrature error estimate too large: {err} (value {val})")
    return min(1.0, max(0.0, val))


def rf_outage_prob(nakagami_m: float, avg_snr: float, gamma_t: float) -> float:
    """Nakagami-m outage: regularized lower incomplete gamma P(m, m gamma_t / avg_snr)."""
    if nakagami_m < 0.5:
        raise ValidationError(f"nakagami_m must be >= 0.5, got {nakagami_m}")
    if avg_snr <= 0.0:
        raise ValidationError(f"avg_snr must be > 0, got {avg_snr}")
    if gamma_t <= 0.0:
        return 0.0
    b = gammainc(nakagami_m, nakagami_m * gamma_t / avg_snr)
    return min(1.0, max(0.0, float(b)))


def evaluate_link_state(fso: FsoParams, rf: RfParams, modulation_order: int,
                        ber0: float,
                        scint_override: ScintillationParams | None = None) -> LinkState:
    """Full physics chain: threshold, scintillation, SNR budgets, outages.

    `scint_override` substitutes externally supplied (alpha, beta, xi), e.g.
    strong-turbulence values quoted from measurement rather than derived
    from a structure parameter.
    """
    gamma_t = switching_threshold(modulation_order, ber0)
    scint = scint_override if scint_override is not None else scintillation(fso)
    snr_fso = fso_avg_snr(fso)
    snr_rf = rf_avg_snr(rf)
    a = fso_outage_prob(scint, snr_fso, gamma_t)
    b = rf_outage_prob(rf.nakagami_m, snr_rf, gamma_t)
    return LinkState(a=a, b=b, gamma_T=gamma_t, avg_snr_fso=snr_fso, avg_snr_rf=snr_rf)
