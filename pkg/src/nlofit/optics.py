"""Closed-form optics: beam geometry, material dispersion, and the
nonlinear-coefficient conversion formulas.

Everything here is a pure function of its SI inputs; the specs are frozen
dataclasses, so values are safe to share across threads. Unit conversion
from laboratory units happens at the configuration boundary
(:mod:`nlofit.config`), never in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import CODATA, PhysicalConstants

#: Peak intensity of a Gaussian pulse of unit fluence and unit FWHM.
GAUSSIAN_PEAK_FACTOR = 2.0 * math.sqrt(math.log(2.0) / math.pi)

#: Allowed temporal profile tags for fluence -> intensity conversion.
PULSE_PROFILES = ("flat-top", "gaussian")


@dataclass(frozen=True)
class MaterialSpec:
    """Linear optical constants and geometry of a sample.

    Parameters
    ----------
    n0 : float
        Linear refractive index (dimensionless), > 1.
    alpha : float
        Linear absorption coefficient (1/m), >= 0.
    length : float
        Sample thickness (m), > 0.
    sellmeier : tuple of (B_i, lambda_i)
        Resonance terms for n(lambda); strengths dimensionless, resonance
        wavelengths in meters. Empty means "constant n0".
    m_star_ratio : float
        Electron effective mass ratio m*/m_e, > 0.
    label : str
        Free-text sample identifier.
    reference_wavelength : float, optional
        Wavelength (m) at which ``n0`` was quoted. When set and Sellmeier
        terms are present, the terms must reproduce n0 within 0.02 there.
    """

    n0: float
    alpha: float
    length: float
    sellmeier: tuple[tuple[float, float], ...] = ()
    m_star_ratio: float = 0.57
    label: str = ""
    reference_wavelength: float | None = None

    def __post_init__(self) -> None:
        if not self.n0 > 1:
            raise ValueError(f"n0 must exceed 1, got {self.n0}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if not self.m_star_ratio > 0:
            raise ValueError(f"m_star_ratio must be positive, got {self.m_star_ratio}")
        object.__setattr__(self, "sellmeier", tuple(tuple(t) for t in self.sellmeier))
        for strength, resonance in self.sellmeier:
            if resonance <= 0:
                raise ValueError(f"Sellmeier resonance must be positive, got {resonance}")
            if strength <= 0:
                raise ValueError(f"Sellmeier strength must be positive, got {strength}")
        if self.sellmeier and self.reference_wavelength is not None:
            n_ref = refractive_index(self, self.reference_wavelength)
            if abs(n_ref - self.n0) > 0.02:
                raise ValueError(
                    f"Sellmeier terms give n={n_ref:.4f} at the reference wavelength, "
                    f"inconsistent with n0={self.n0} (tolerance 0.02)"
                )


@dataclass(frozen=True)
class BeamSpec:
    """Laser beam parameters.

    At least one of ``na`` and ``waist`` must be given; the waist is derived
    from the numerical aperture when absent.

    Parameters
    ----------
    wavelength : float
        Vacuum wavelength (m), > 0.
    na : float, optional
        Numerical aperture of the focusing lens, in (0, 1).
    waist : float, optional
        Beam waist w0 (m), > 0.
    pulse_fwhm : float
        Pulse duration as FWHM (s), > 0.
    fluence : float
        Peak fluence (J/m^2), > 0.
    profile : str
        Temporal profile tag for fluence -> intensity, "flat-top" or
        "gaussian".
    """

    wavelength: float
    pulse_fwhm: float
    fluence: float
    na: float | None = None
    waist: float | None = None
    profile: str = "flat-top"

    def __post_init__(self) -> None:
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not self.pulse_fwhm > 0:
            raise ValueError(f"pulse_fwhm must be positive, got {self.pulse_fwhm}")
        if not self.fluence > 0:
            raise ValueError(f"fluence must be positive, got {self.fluence}")
        if self.na is None and self.waist is None:
            raise ValueError("at least one of na, waist must be given")
        if self.na is not None and not 0 < self.na < 1:
            raise ValueError(f"na must lie in (0, 1), got {self.na}")
        if self.waist is not None and not self.waist > 0:
            raise ValueError(f"waist must be positive, got {self.waist}")
        if self.profile not in PULSE_PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}, expected one of {PULSE_PROFILES}")


def beam_waist_from_na(wavelength: float, na: float) -> float:
    """Diffraction-limited beam waist 0.61*lambda/NA (m)."""
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if not 0 < na < 1:
        raise ValueError(f"na must lie in (0, 1), got {na}")
    return 0.61 * wavelength / na


def beam_waist(beam: BeamSpec) -> float:
    """Waist of a beam spec: the explicit value, else derived from the NA."""
    if beam.waist is not None:
        return beam.waist
    return beam_waist_from_na(beam.wavelength, beam.na)


def rayleigh_length(waist: float, wavelength: float) -> float:
    """Rayleigh length pi*w0^2/lambda (m)."""
    if not waist > 0:
        raise ValueError(f"waist must be positive, got {waist}")
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return math.pi * waist * waist / wavelength


def effective_length(alpha: float, length: float) -> float:
    """Absorption-corrected interaction length (1 - exp(-alpha*L))/alpha (m).

    Equals L exactly in the alpha -> 0 limit; monotonically decreasing in
    alpha and never larger than L.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    if alpha == 0:
        return length
    # clamp: rounding can nudge the ratio above L for alpha*length ~ eps
    return min(length, -math.expm1(-alpha * length) / alpha)


def peak_intensity(fluence: float, pulse_fwhm: float, profile: str = "flat-top") -> float:
    """Peak intensity (W/m^2) of a pulse with the given fluence and FWHM.

    "flat-top" divides fluence by the FWHM; "gaussian" returns the on-axis
    peak of a Gaussian pulse of equal fluence, 2*sqrt(ln2/pi)*F/tau.
    """
    if fluence < 0:
        raise ValueError(f"fluence must be >= 0, got {fluence}")
    if not pulse_fwhm > 0:
        raise ValueError(f"pulse_fwhm must be positive, got {pulse_fwhm}")
    if profile == "flat-top":
        return fluence / pulse_fwhm
    if profile == "gaussian":
        return GAUSSIAN_PEAK_FACTOR * fluence / pulse_fwhm
    raise ValueError(f"unknown profile {profile!r}, expected one of {PULSE_PROFILES}")


def refractive_index(material: MaterialSpec, wavelength: float) -> float:
    """Refractive index from the material's Sellmeier terms.

    n^2 = 1 + sum_i B_i lambda^2 / (lambda^2 - lambda_i^2). Falls back to
    the constant ``n0`` when no terms are configured.
    """
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if not material.sellmeier:
        return material.n0
    lam2 = wavelength * wavelength
    n2 = 1.0
    for strength, resonance in material.sellmeier:
        denom = lam2 - resonance * resonance
        if denom == 0:
            raise ValueError(f"wavelength {wavelength} m sits on a Sellmeier resonance pole")
        n2 += strength * lam2 / denom
    if n2 <= 0:
        raise ValueError(f"Sellmeier radicand {n2} is non-positive at {wavelength} m")
    return math.sqrt(n2)


def coherence_length_shg(material: MaterialSpec, wavelength: float) -> float:
    """Second-harmonic coherence length pi/dk (m).

    dk = (4*pi/lambda) * (n(lambda/2) - n(lambda)), so this reduces to
    lambda / (4 * (n(lambda/2) - n(lambda))); positive for normal dispersion.
    """
    n_fund = refractive_index(material, wavelength)
    n_harm = refractive_index(material, wavelength / 2.0)
    gap = n_harm - n_fund
    if gap == 0:
        raise ValueError("flat dispersion: zero phase mismatch has no finite coherence length")
    return wavelength / (4.0 * gap)


def vacuum_wavenumber(wavelength: float) -> float:
    """Vacuum wave vector 2*pi/lambda (1/m)."""
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return 2.0 * math.pi / wavelength


def angular_frequency(wavelength: float, constants: PhysicalConstants = CODATA) -> float:
    """Angular frequency 2*pi*c/lambda (rad/s)."""
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return 2.0 * math.pi * constants.c / wavelength


def chi3_from_coefficients(
    n0: float,
    n2: float,
    beta: float,
    k: float,
    constants: PhysicalConstants = CODATA,
) -> tuple[float, float]:
    """Third-order susceptibility parts from the nonlinear coefficients.

    Re chi3 = 2 n0^2 eps0 c n2, Im chi3 = n0^2 eps0 c beta / k, both in SI
    (m^2/V^2). Signs follow the signs of n2 and beta.
    """
    if not n0 > 1:
        raise ValueError(f"n0 must exceed 1, got {n0}")
    if not k > 0:
        raise ValueError(f"wave vector k must be positive, got {k}")
    scale = n0 * n0 * constants.eps0 * constants.c
    return 2.0 * scale * n2, scale * beta / k


def drude_index_change(
    carrier_density: float,
    omega: float,
    n0: float,
    m_star_ratio: float,
    constants: PhysicalConstants = CODATA,
) -> float:
    """Free-carrier refractive index change, -e^2 N / (2 n0 m* eps0 w^2).

    Always <= 0 and linear in the carrier density N (1/m^3).
    """
    if carrier_density < 0:
        raise ValueError(f"carrier_density must be >= 0, got {carrier_density}")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if not n0 > 0:
        raise ValueError(f"n0 must be positive, got {n0}")
    if not m_star_ratio > 0:
        raise ValueError(f"m_star_ratio must be positive, got {m_star_ratio}")
    e = constants.e_charge
    m_star = m_star_ratio * constants.m_e
    return -e * e * carrier_density / (2.0 * n0 * m_star * constants.eps0 * omega * omega)


def tpa_carrier_density(
    beta: float,
    intensity: float,
    pulse_fwhm: float,
    omega: float,
    constants: PhysicalConstants = CODATA,
) -> float:
    """Carrier density generated by two-photon absorption over one pulse.

    N = beta I^2 tau_p / (2 hbar w): the generation rate beta I^2/(2 hbar w)
    integrated over the pulse duration. Quadratic in the intensity.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    if not pulse_fwhm > 0:
        raise ValueError(f"pulse_fwhm must be positive, got {pulse_fwhm}")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return beta * intensity * intensity * pulse_fwhm / (2.0 * constants.hbar * omega)


def tpa_index_kappa(
    omega: float,
    n0: float,
    m_star_ratio: float,
    pulse_fwhm: float,
    constants: PhysicalConstants = CODATA,
) -> float:
    """Proportionality constant kappa in dn_TPA = kappa * beta * I^2.

    Built by composing the TPA carrier generation with the Drude index
    change at unit beta*I^2, so downstream users agree with the explicit
    composition to rounding error. Negative by construction.
    """
    density_per_beta_i2 = tpa_carrier_density(1.0, 1.0, pulse_fwhm, omega, constants)
    return drude_index_change(density_per_beta_i2, omega, n0, m_star_ratio, constants)
