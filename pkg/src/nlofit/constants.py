"""Physical constants and shipped material defaults.

All values are SI. The fundamental constants are CODATA values taken from
:mod:`scipy.constants` so they stay in sync with the installed scipy.
"""

from dataclasses import dataclass, fields

from scipy import constants as _codata


@dataclass(frozen=True)
class PhysicalConstants:
    """Bundle of the fundamental constants used by the optics formulas.

    Attributes
    ----------
    c : float
        Speed of light in vacuum (m/s).
    eps0 : float
        Vacuum permittivity (F/m).
    e_charge : float
        Elementary charge (C).
    m_e : float
        Electron rest mass (kg).
    hbar : float
        Reduced Planck constant (J*s).
    """

    c: float = _codata.c
    eps0: float = _codata.epsilon_0
    e_charge: float = _codata.e
    m_e: float = _codata.m_e
    hbar: float = _codata.hbar

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"constant {f.name!r} must be positive")

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


#: Default constants instance shared by every formula.
CODATA = PhysicalConstants()

# Two-term Sellmeier fit for type-IIa diamond, resonances in meters:
# n^2 = 1 + 0.3306 L^2/(L^2 - (175 nm)^2) + 4.3356 L^2/(L^2 - (106 nm)^2).
# Fit to F. Peter, Z. Phys. 15, 358 (1923) data as tabulated on
# refractiveindex.info; valid roughly 225 nm - 2 um. Shipped as a documented
# default, not hard-coded truth: any material can supply its own terms.
DIAMOND_SELLMEIER: tuple[tuple[float, float], ...] = (
    (0.3306, 175e-9),
    (4.3356, 106e-9),
)
