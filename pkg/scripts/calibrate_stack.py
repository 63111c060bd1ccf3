"""Refit the effective LiNbO3 shear stiffness of the default stack.

Finds the substrate mu for which the CoFeB(100 nm)/ZnO(700 nm)/LiNbO3
fundamental Love mode at 9.2 um wavelength has phase velocity 3772 m/s
(410 MHz), and prints the constant to paste into msaw/dispersion.py.

    python scripts/calibrate_stack.py
"""

from scipy.optimize import brentq

from msaw.dispersion import (
    DEFAULT_WAVELENGTH,
    TARGET_VELOCITY,
    calibrated_default_stack,
    fundamental_velocity,
)
from msaw.materials import LayerStack


def velocity_for(mu_substrate: float) -> float:
    stack = calibrated_default_stack()
    stack = LayerStack(stack.substrate.with_shear_stiffness(mu_substrate), stack.layers)
    return fundamental_velocity(stack, DEFAULT_WAVELENGTH)


def main():
    rho = calibrated_default_stack().substrate.density
    lo = rho * (TARGET_VELOCITY * 1.0001) ** 2
    hi = rho * (TARGET_VELOCITY * 1.5) ** 2
    mu = brentq(lambda m: velocity_for(m) - TARGET_VELOCITY, lo, hi, xtol=1e-3, rtol=1e-15)
    print(f"LINBO3_EFFECTIVE_SHEAR_STIFFNESS = {mu!r}")
    print(f"substrate shear velocity = {(mu / rho) ** 0.5:.3f} m/s")
    print(f"fundamental velocity     = {velocity_for(mu):.6f} m/s")


if __name__ == "__main__":
    main()
