"""Legendre functions of real degree on (-1, 1] and related closed forms.

P_nu is evaluated from the hypergeometric representation

    P_nu(x) = 2F1(-nu, nu + 1; 1; (1 - x) / 2).

For x >= 0 the series is summed directly (argument <= 1/2).  For x < 0
the logarithmic connection formula around argument 1 is used instead,
which converges geometrically in (1 + x) / 2 and carries the log
singularity at x = -1 explicitly.  Integer degrees reduce to the
terminating series (Legendre polynomials) everywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from .errors import BracketError, ConvergenceError, DomainError, GammaPoleError

ABS_TOL = 1e-13
MAX_TERMS = 20000
# closest approach to the singularity at x = -1 before a conditioning warning
SINGULAR_GUARD = 1e-6
EULER_GAMMA = 0.57721566490153286061


def _is_integer(nu: float) -> bool:
    return float(nu).is_integer()


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _check_domain(x: np.ndarray, open_right: bool) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite argument")
    if np.any(x <= -1.0):
        raise DomainError("Legendre function of real degree is singular at x <= -1")
    if np.any(x > 1.0) or (open_right and np.any(x >= 1.0)):
        raise DomainError("argument outside (-1, 1]" if not open_right else "argument outside (-1, 1)")
    if np.any(x < -1.0 + SINGULAR_GUARD):
        warnings.warn("Legendre evaluation within 1e-6 of the singularity at -1; "
                      "result is ill-conditioned", RuntimeWarning, stacklevel=3)


def hyp2f1_series(a: float, b: float, c: float, z, tol: float = 1e-17) -> np.ndarray:
    """Sum 2F1(a, b; c; z) term by term for |z| < 1 (vectorized in z)."""
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for n in range(MAX_TERMS):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + term
        if not np.any(term):
            return total
        if n > abs(a) + abs(b) + 2 and np.all(np.abs(term) <= tol * np.maximum(1.0, np.abs(total))):
            return total
    raise ConvergenceError(f"2F1({a}, {b}; {c}; z) did not converge in {MAX_TERMS} terms")


def _legendre_near_minus_one(nu: float, w: np.ndarray) -> np.ndarray:
    """P_nu at x = 2w - 1 via the c = a + b connection formula, w = (1 + x)/2 <= 1/2.

    With a = -nu the digamma terms psi(a + n) have poles when nu is close to an
    integer k, and 1/Gamma(a) has a matching zero.  The products
    (a)_n psi(a + n) / Gamma(a) are formed with the pole factor divided out
    analytically, so near-integer degrees keep full accuracy.
    """
    if nu < -0.5:
        nu = -nu - 1.0  # P_nu = P_{-nu-1}
    a, b = -nu, nu + 1.0
    k = max(0, round(nu))  # a + k + 1 >= 1/2: no pole beyond index k
    g_top = rgamma(a + k + 1.0)
    psi_top = float(digamma(a + k + 1.0))
    fac = [a + i for i in range(k + 1)]  # 1/Gamma(a) = g_top * prod(fac)
    log_w = np.log(w)
    total = np.zeros_like(w)
    power = np.ones_like(w)
    b_coef = rgamma(b)  # (b)_n / (Gamma(b) n!^2)
    psi_b = float(digamma(b))
    psi_1 = -EULER_GAMMA
    lead = 1.0  # (a)_n for n <= k
    big_a = psi_a = 0.0
    for n in range(MAX_TERMS):
        if n <= k:
            big_a = g_top * math.prod(fac) * lead
            big_b = big_a * psi_top - sum(
                g_top * math.prod(fac[:j] + fac[j + 1:]) * lead for j in range(n, k + 1))
            lead *= a + n
        else:
            big_a *= a + n - 1.0
            psi_a = psi_top if n == k + 1 else psi_a + 1.0 / (a + n - 1.0)
            big_b = big_a * psi_a
        term = b_coef * power * (big_a * (2.0 * psi_1 - psi_b - log_w) - big_b)
        total = total + term
        if n > abs(nu) + 2 and np.all(np.abs(term) <= 1e-17 * np.maximum(1.0, np.abs(total))):
            return total
        b_coef *= (b + n) / ((n + 1.0) ** 2)
        power = power * w
        psi_1 += 1.0 / (n + 1.0)
        psi_b += 1.0 / (b + n)
    raise ConvergenceError(f"P_{nu} connection series did not converge in {MAX_TERMS} terms")


def _p_values(nu: float, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    if _is_integer(nu):
        # P_n(-x) = (-1)^n P_n(x) keeps the terminating series at argument <= 1/2
        n = nu if nu >= 0 else -nu - 1.0
        sign = np.where(x < 0.0, (-1.0) ** n, 1.0)
        return sign * hyp2f1_series(-n, n + 1.0, 1.0, (1.0 - np.abs(x)) / 2.0)
    right = x >= 0.0
    if np.any(right):
        out[right] = hyp2f1_series(-nu, nu + 1.0, 1.0, (1.0 - x[right]) / 2.0)
    if np.any(~right):
        out[~right] = _legendre_near_minus_one(nu, (1.0 + x[~right]) / 2.0)
    return out


def _p_prime_values(nu: float, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    if nu == 0.0 or nu == -1.0:
        return np.zeros_like(x)
    scale = nu * (nu + 1.0) / 2.0
    if _is_integer(nu):
        n = nu if nu >= 0 else -nu - 1.0
        sign = np.where(x < 0.0, (-1.0) ** (n + 1.0), 1.0)
        return sign * scale * hyp2f1_series(1.0 - n, n + 2.0, 2.0, (1.0 - np.abs(x)) / 2.0)
    right = x >= 0.0
    if np.any(right):
        out[right] = scale * hyp2f1_series(1.0 - nu, nu + 2.0, 2.0, (1.0 - x[right]) / 2.0)
    if np.any(~right):
        xl = x[~right]
        out[~right] = nu * (_p_values(nu - 1.0, xl) - xl * _p_values(nu, xl)) / (1.0 - xl * xl)
    return out


def legendre_p(nu: float, x):
    """Legendre function of the first kind P_nu(x) for real nu and x in (-1, 1].

    Accepts scalars or arrays; returns the same shape.
    """
    if not math.isfinite(nu):
        raise DomainError("degree must be finite")
    arr, scalar = _as_array(x)
    _check_domain(arr, open_right=False)
    vals = _p_values(float(nu), arr.reshape(-1)).reshape(arr.shape)
    return float(vals) if scalar else vals


def legendre_p_prime(nu: float, x):
    """dP_nu/dx on (-1, 1).

    Uses (1 - x^2) P'_nu = nu (P_{nu-1} - x P_nu) for x < 0 and the
    differentiated hypergeometric series for x >= 0, where the recurrence
    loses digits as x -> 1.
    """
    if not math.isfinite(nu):
        raise DomainError("degree must be finite")
    arr, scalar = _as_array(x)
    _check_domain(arr, open_right=True)
    vals = _p_prime_values(float(nu), arr.reshape(-1)).reshape(arr.shape)
    return float(vals) if scalar else vals


def legendre_p_prime_closed(nu: float, x):
    """Like legendre_p_prime but also defined at x = 1, where P'_nu(1) = nu(nu+1)/2."""
    arr, scalar = _as_array(x)
    _check_domain(arr, open_right=False)
    vals = _p_prime_values(float(nu), arr.reshape(-1)).reshape(arr.shape)
    return float(vals) if scalar else vals


def gamma(x: float) -> float:
    """Gamma function; raises GammaPoleError at nonpositive integers."""
    if x <= 0 and float(x).is_integer():
        raise GammaPoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """Reciprocal Gamma, continued by zero at the poles."""
    if x <= 0 and float(x).is_integer():
        return 0.0
    return 1.0 / math.gamma(x)


@dataclass(frozen=True)
class ClosedForms:
    m: float
    p_prime_0: float
    q_prime_0: float | None
    poles: tuple[str, ...] = ()


def gamma_closed_forms(m: float) -> ClosedForms:
    """Closed forms of P'_m(0) and Q'_m(0) through Gamma functions.

    P'_m(0) = m sqrt(pi) / (Gamma((2-m)/2) Gamma((m-1)/2 + 1))
    Q'_m(0) = -m pi^(3/2) tan(pi (m-1)/2) / ((m-1) Gamma((2-m)/2) Gamma((m-1)/2))

    A Gamma pole in a denominator makes that factor vanish; when this meets
    an infinite tangent or m = 1 the Q' form is indeterminate and returned
    as None, with the offending factors listed in ``poles``.
    """
    poles = []
    g1 = (2.0 - m) / 2.0
    g2 = (m - 1.0) / 2.0 + 1.0
    for arg in (g1, g2):
        if arg <= 0 and float(arg).is_integer():
            poles.append(f"Gamma({arg:g})")
    p_prime = m * math.sqrt(math.pi) * rgamma(g1) * rgamma(g2)

    q_prime: float | None
    g3 = (m - 1.0) / 2.0
    half_turns = (m - 1.0) / 2.0 - 0.5  # tan(pi (m-1)/2) is infinite when this is an integer
    tan_infinite = float(half_turns).is_integer()
    if g3 <= 0 and float(g3).is_integer():
        poles.append(f"Gamma({g3:g})")
    if m == 1.0:
        poles.append("1/(m-1)")
        q_prime = None
    elif tan_infinite:
        poles.append("tan(pi(m-1)/2)")
        q_prime = None
    else:
        q_prime = (-m * math.pi ** 1.5 * math.tan(math.pi * (m - 1.0) / 2.0)
                   / (m - 1.0) * rgamma(g1) * rgamma(g3))
    return ClosedForms(m=m, p_prime_0=p_prime, q_prime_0=q_prime, poles=tuple(poles))


@dataclass(frozen=True)
class RootResult:
    z0: float
    theta_star: float
    opening: float
    residual: float

    @property
    def water_angle(self) -> float:
        """arccos(z0) = pi - theta_star, the angle quoted for the pointed bubble (radians)."""
        return math.pi - self.theta_star

    def as_dict(self) -> dict:
        return {
            "z0": self.z0,
            "theta_star": self.theta_star,
            "opening": self.opening,
            "water_angle": self.water_angle,
            "residual": self.residual,
        }


def find_z0(tol: float = 1e-12, bracket: tuple[float, float] = (-0.99, -0.01)) -> RootResult:
    """Zero z0 of P'_{3/2} in (-1, 0): bisection to width 1e-14, then a secant polish."""
    if not tol > 0:
        raise DomainError("tol must be positive")

    def f(x: float) -> float:
        return legendre_p_prime(1.5, x)

    lo, hi = bracket
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        lo = hi = lo
    elif fhi == 0.0:
        lo = hi
    elif np.sign(flo) == np.sign(fhi):
        raise BracketError(f"P'_3/2 has no sign change on [{lo}, {hi}]")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            lo = hi = mid
            break
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    if hi > lo and fhi != flo:
        z0 = lo - flo * (hi - lo) / (fhi - flo)
        if not lo <= z0 <= hi:
            z0 = 0.5 * (lo + hi)
    else:
        z0 = lo
    residual = abs(f(z0))
    if residual >= tol:
        raise ConvergenceError(f"root residual {residual:.3e} exceeds tol {tol:.1e}")
    theta_star = math.acos(-z0)
    return RootResult(z0=z0, theta_star=theta_star, opening=2.0 * theta_star, residual=residual)


def lemma_f(x):
    """f(x) = y(x) y'(-x) + y(-x) y'(x) with y = P_{3/2}; symmetric and negative on (-1, 1)."""
    arr, scalar = _as_array(x)
    _check_domain(arr, open_right=True)
    _check_domain(-arr, open_right=True)
    y = legendre_p(1.5, arr)
    ym = legendre_p(1.5, -arr)
    dy = legendre_p_prime(1.5, arr)
    dym = legendre_p_prime(1.5, -arr)
    vals = y * dym + ym * dy
    return float(vals) if scalar else vals


def legendre_ratio(x):
    """g(x) = P'_{3/2}(x) / P'_{3/2}(-x), strictly increasing where defined."""
    return legendre_p_prime(1.5, x) / legendre_p_prime(1.5, -np.asarray(x, dtype=float))
