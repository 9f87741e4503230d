"""Error taxonomy shared by all modules.

Every physics-level failure derives from PhysicsError so the CLI can map the
whole family to a single exit code. Warnings that should not abort a run
(adiabaticity, grid coverage) are warning categories, not exceptions.
"""

from __future__ import annotations


class PhysicsError(Exception):
    """Base class for physics/domain failures (CLI exit code 3)."""


class TruncationError(PhysicsError):
    """Fock truncation too small for the requested amplitude or grid."""


class KindMismatch(PhysicsError):
    """tensor() received factors of different kinds."""


class SpaceMismatch(PhysicsError):
    """Operator/state defined on different spaces."""


class MultiValuedFlux(PhysicsError):
    """beta_J >= 1/2: the flux equation is multi-valued, use enumerate_branches."""


class ConvergenceError(PhysicsError):
    """Root search or eigensolve failed to converge to tolerance."""


class NoSweetSpot(PhysicsError):
    """beta_J >= 1/sqrt(2): no flux sweet spot exists."""


class NoCrossing(PhysicsError):
    """omega_b - 2*omega_m does not change sign on the sweep interval."""


class StepFailure(PhysicsError):
    """Adaptive integrator step-size controller underflowed."""


class DegenerateNull(PhysicsError):
    """Liouvillian null space larger than the parity doubling allows."""


class EigenFailure(PhysicsError):
    """Liouvillian eigenanalysis failed."""


class IllConditioned(PhysicsError):
    """Fit problem is singular or degenerate on the given data."""


class NoOscillation(PhysicsError):
    """No spectral peak above the noise floor; cannot fit a sinusoid."""


class NoStabilization(PhysicsError):
    """Detuning exceeds the stabilization threshold; no steady cat exists."""


class NonConvergence(PhysicsError):
    """Fixed-point iteration exceeded its iteration budget."""


class DivByZero(PhysicsError, ZeroDivisionError):
    """A closed form was evaluated at a parameter that zeroes a denominator."""


class DimensionCap(PhysicsError):
    """Requested diagonalization exceeds the configured dimension cap."""


class LabelAmbiguity(PhysicsError):
    """Eigenstate labeling is ambiguous (hybridization / mistracking)."""


class InconsistentContraction(PhysicsError):
    """Logical x and y contractions disagree beyond tolerance."""


class ConfigError(Exception):
    """Malformed or unknown configuration input (CLI exit code 2)."""


class AdiabaticityWarning(UserWarning):
    """8 g2 |alpha| < kappa_b is violated; adiabatic elimination is suspect."""


class CoverageWarning(UserWarning):
    """Wigner grid does not cover the state support; integrals are biased."""


class TraceDriftWarning(UserWarning):
    """Integrator trace drift exceeded the reporting threshold."""


class MethodDisagreement(UserWarning):
    """Spectral and finite-horizon rate extractions disagree beyond 10%."""
