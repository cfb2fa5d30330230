"""Stage parameters of the power-of-Hamilton-cycle strategy."""
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence

from budgetgraph.errors import ParameterError
from budgetgraph.graph import complete_edge_count
from budgetgraph.hampower.absorbers import absorber_max_density, spine_length
from budgetgraph.hampower.linkages import interval_partition
from budgetgraph.models import HamPowerParams
from budgetgraph.patterns import path_power_one_density

logger = logging.getLogger(__name__)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, math.isqrt(q) + 1))


def choose_eta(n: int, s: int, q: int, r: int) -> int:
    """
    Largest eta in the window ending at floor(n / (3(s+1))) with
    n - eta(s+1) - (eta-1)r divisible by q.

    The condition reads eta * (s+1+r) = n + r (mod q); q prime and larger
    than s+1+r makes s+1+r invertible, so exactly one residue works.
    """
    base = n // (3 * (s + 1))
    residue = (n + r) * pow(s + 1 + r, -1, q) % q
    eta = base - (base - residue) % q
    if eta < 1:
        raise ParameterError(
            f"no eta >= 1 in the window ending at {base} for n={n}, s={s}, q={q}, r={r}; n is too small"
        )
    return eta


def theta(p: float, m: int, density: Fraction, delta: float, constant: float) -> float:
    """Part count K * p^{d*} * m^{1 - delta*d*/2} of a factor sub-problem on m vertices."""
    d = float(density)
    return constant * p ** d * m ** (1 - delta * d / 2)


def _clamp(value: int, low: int, high: int, label: str) -> int:
    clamped = min(max(value, low), high)
    if clamped != value:
        logger.warning("%s=%d clamped to %d at this scale", label, value, clamped)
    return clamped


def split_stages(t: int, weights: Sequence[float]) -> List[int]:
    """
    t_1..t_4 proportional to ``weights``, floored, with the remainder in stage IV.

    Equal weights give t//4 for the first three stages.
    """
    if len(weights) != 4 or any(w <= 0 for w in weights):
        raise ParameterError(f"need four positive stage weights, got {list(weights)}")
    total = sum(weights)
    lengths = [math.floor(t * w / total) for w in weights[:3]]
    return lengths + [t - sum(lengths)]


def linkage_room_fits(w_size: int, eta: int, nu: int, r: int, xi: int) -> bool:
    """
    Whether xi groups leave every linkage family enough room.

    Stage II splits the vertices outside the absorbers into xi intervals for
    the eta-1 absorber links; stage IV splits floor(eta/xi)*xi absorption
    vertices for the nu+1 closing links. Each family of f linkages of length
    r needs 4rf vertices.
    """
    w_parts = interval_partition(w_size, xi)
    for group, part in zip(interval_partition(eta - 1, xi), w_parts):
        if 4 * r * len(group) > len(part):
            return False
    zeta = eta // xi
    return all(4 * r * len(group) <= zeta for group in interval_partition(nu + 1, xi))


def derive_params(
    n: int,
    t: int,
    k: int = 2,
    epsilon: float = 0.5,
    j: int = 3,
    ell: int = 4,
    q: int = 43,
    r: int = 0,
    k_pi: float = 1.0,
    k_sigma: float = 1.0,
    epsilon_prime: float = 1 / 3,
    threshold_scale: float = 2.0,
    search_budget: int = 1_000_000,
    eta: Optional[int] = None,
    stage_weights: Sequence[float] = (1.0, 1.0, 1.0, 1.0),
    pool_slack: int = 0,
    search_restarts: int = 8,
    search_seed: int = 0,
) -> HamPowerParams:
    """
    Derive all stage parameters.

    Args:
        n: Number of vertices
        t: Number of presented edges, split over the stages by ``stage_weights``
        k: Power of the Hamilton cycle
        epsilon: Budget slack; b = n^{2k-1+epsilon} / t^{k-1}
        j: Absorber parameter j
        ell: Absorber parameter ell
        q: Order of the P_q^k paths; prime and larger than s+1+r
        r: Linkage length
        k_pi: Constant in the stage I part count
        k_sigma: Constant in the stage III part count
        epsilon_prime: Density slack delta in the part counts
        threshold_scale: Stage IV threshold as a multiple of p*zeta/ln n
        search_budget: Node budget for every search
        eta: Absorber count; chosen by the residue window when None
        stage_weights: Relative stage lengths; equal weights give t/4 each
        pool_slack: Extra vertices stage I may draw absorbers from
        search_restarts: Rounds of every randomized search
        search_seed: Seed of the randomized searches, reset every trial

    Returns:
        The parameters

    Raises:
        ParameterError: On a non-prime or too small q, no admissible eta,
            or linkage families that cannot fit even with one group
    """
    if k < 2:
        raise ParameterError(f"powers of Hamilton cycles are handled for k >= 2, got {k}")
    if not 1 <= t <= complete_edge_count(n):
        raise ParameterError(f"t={t} outside [1, M] for n={n}")
    s = spine_length(j, ell)
    if not is_prime(q) or q <= s + 1 + r:
        raise ParameterError(f"q={q} must be a prime larger than s+1+r={s + 1 + r}")
    if eta is None:
        eta = choose_eta(n, s, q, r)
    elif eta < 1:
        raise ParameterError(f"eta must be positive, got {eta}")
    nu, rest = divmod(n - eta * (s + 1) - (eta - 1) * r, q)
    if rest or nu < 0:
        raise ParameterError(f"eta={eta} leaves a remainder for n={n}")
    w_size = n - eta * (s + 1)
    if not 0 <= pool_slack <= w_size:
        raise ParameterError(f"pool_slack={pool_slack} outside [0, {w_size}]")

    xi_formula = math.floor((t / n ** 2) ** (k / (1 - epsilon / 2)) * n)
    xi = _clamp(xi_formula, 1, min(eta, nu + 1), "xi")
    while xi > 1 and not linkage_room_fits(w_size, eta, nu, r, xi):
        xi -= 1
    if not linkage_room_fits(w_size, eta, nu, r, xi):
        raise ParameterError(f"linkages of length {r} do not fit: eta={eta}, nu={nu}, |W|={w_size}")
    if xi != min(max(xi_formula, 1), eta, nu + 1):
        logger.warning("xi lowered to %d so every linkage family has room", xi)

    total = complete_edge_count(n)
    stage_lengths = split_stages(t, stage_weights)

    pi_raw = math.floor(theta(stage_lengths[0] / total, eta * (s + 1), absorber_max_density(j, ell, k), epsilon_prime, k_pi))
    pi = _clamp(pi_raw, 1, eta, "pi")
    if nu > 0:
        # the densest subgraph of P_q^k is P_q^k itself
        density = path_power_one_density(q, k)
        sigma_raw = math.floor(theta(stage_lengths[2] / total, nu * q, density, epsilon_prime, k_sigma))
        sigma = _clamp(sigma_raw, 1, nu, "sigma")
    else:
        sigma = 0

    budget = math.floor(n ** (2 * k - 1 + epsilon) / t ** (k - 1))
    params = HamPowerParams(
        n=n,
        t=t,
        k=k,
        epsilon=epsilon,
        epsilon_prime=epsilon_prime,
        j=j,
        ell=ell,
        s=s,
        q=q,
        r=r,
        eta=eta,
        nu=nu,
        xi_formula=xi_formula,
        xi=xi,
        pi=pi,
        sigma=sigma,
        stage_lengths=stage_lengths,
        budget=budget,
        k_pi=k_pi,
        k_sigma=k_sigma,
        threshold_scale=threshold_scale,
        search_budget=search_budget,
        pool_slack=pool_slack,
        search_restarts=search_restarts,
        search_seed=search_seed,
    )
    logger.info(
        "ham power params: eta=%d nu=%d xi=%d pi=%d sigma=%d b=%d stages=%s",
        eta, nu, xi, pi, sigma, budget, stage_lengths,
    )
    return params
