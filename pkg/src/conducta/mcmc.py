"""Random-walk Metropolis-Hastings over GP hyperparameters.

The sampler works in eta = (log lengthscale, log signal_var, log noise_var)
with a symmetric Gaussian proposal per coordinate, targeting the marginal
posterior p(hyperparams | y): the latent function is integrated out
analytically, so each step costs one Cholesky factorization. Priors are
gamma densities on the precision parametrization (phi = lengthscale^-2 and
the reciprocals of the variances) with the change-of-variable terms for eta
added explicitly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .gp import GpError, Hyperparams, fit, log_marginal_likelihood, predict

PARAM_NAMES = ("lengthscale", "signal_var", "noise_var")

ADAPT_WINDOW = 50
ADAPT_LOW, ADAPT_HIGH = 0.2, 0.5
_MAX_INIT_TRIES = 100


class McmcError(ValueError):
    """Invalid sampler configuration or unusable targets."""


@dataclass(frozen=True)
class GammaPrecisionPrior:
    """Gamma prior on a precision: shape shape_a/2, mean omega.

    Density p(phi) = (a/(2 w))^{a/2} / Gamma(a/2) * phi^{a/2 - 1}
    * exp(-phi a / (2 w)) for phi > 0.
    """

    shape_a: float
    omega: float

    def __post_init__(self):
        if not (self.shape_a > 0 and self.omega > 0):
            raise McmcError(f"prior parameters must be positive, got {self}")

    def log_density(self, phi):
        if phi <= 0:
            raise McmcError(f"precision must be positive, got {phi}")
        half = 0.5 * self.shape_a
        rate = half / self.omega
        return half * math.log(rate) - gammaln(half) + (half - 1.0) * math.log(phi) - rate * phi


@dataclass(frozen=True)
class PriorSet:
    """One gamma precision prior per positive hyperparameter."""

    lengthscale: GammaPrecisionPrior
    signal_var: GammaPrecisionPrior
    noise_var: GammaPrecisionPrior

    @classmethod
    def default(cls):
        p = GammaPrecisionPrior(shape_a=2.0, omega=1.0)
        return cls(lengthscale=p, signal_var=p, noise_var=p)


@dataclass(frozen=True)
class MhConfig:
    steps: int = 2000
    burn_in: int = 500
    chains: int = 4
    proposal_scales: tuple = (0.3, 0.3, 0.3)
    seed: int = 0
    adapt: bool = True

    def validate(self):
        if not (self.steps > self.burn_in >= 0):
            raise McmcError(f"need steps > burn_in >= 0, got {self.steps}, {self.burn_in}")
        if self.chains < 1:
            raise McmcError("need at least one chain")
        if len(self.proposal_scales) != 3 or any(s <= 0 for s in self.proposal_scales):
            raise McmcError("proposal_scales must be three positive reals")
        return self


@dataclass(frozen=True)
class PosteriorSamples:
    """Post-burn-in draws per chain with acceptance bookkeeping."""

    draws: tuple                 # per chain: list of Hyperparams
    log_posterior: tuple         # per chain: np.ndarray
    accepted: tuple              # per chain: np.ndarray of bool
    acceptance_rate: tuple       # per chain: float, post-burn-in
    config: MhConfig

    @property
    def n_chains(self):
        return len(self.draws)

    def parameter_array(self):
        """Draws as an array of shape (chains, kept_steps, 3), natural scale."""
        out = np.array(
            [[(h.lengthscale, h.signal_var, h.noise_var) for h in chain] for chain in self.draws]
        )
        return out

    def pooled(self):
        """All draws concatenated chain-major."""
        return [h for chain in self.draws for h in chain]


def _hp_from_eta(eta):
    return Hyperparams(
        lengthscale=math.exp(eta[0]),
        signal_var=math.exp(eta[1]),
        noise_var=math.exp(eta[2]),
    )


def log_prior(hp, priors):
    """Sum of gamma log densities at the precision parametrization.

    Evaluated at phi_l = lengthscale^-2, phi_f = signal_var^-1 and
    phi_n = noise_var^-1; includes no change-of-variable term (that belongs
    to the sampling parametrization in log_posterior).
    """
    if hp.lengthscale <= 0 or hp.signal_var <= 0 or hp.noise_var <= 0:
        raise McmcError(f"parameters must be strictly positive, got {hp}")
    return (
        priors.lengthscale.log_density(hp.lengthscale**-2)
        + priors.signal_var.log_density(1.0 / hp.signal_var)
        + priors.noise_var.log_density(1.0 / hp.noise_var)
    )


def log_posterior(X, y, hp, priors):
    """Unnormalized log target over eta = log-parameters.

    Marginal likelihood plus the precision priors plus the log Jacobian of
    the (precision <- eta) map: |d phi_l / d log l| = 2 phi_l and
    |d phi / d log v| = phi for the variances. With priors=None the target
    is the marginal likelihood alone (improper flat prior on eta).
    Cholesky failures and positivity violations map to -inf so the proposal
    is rejected instead of raising.
    """
    if not (hp.lengthscale > 0 and hp.signal_var > 0 and hp.noise_var > 0):
        return -np.inf
    if not all(map(math.isfinite, (hp.lengthscale, hp.signal_var, hp.noise_var))):
        return -np.inf
    try:
        lml = log_marginal_likelihood(fit(X, y, hp))
    except (GpError, np.linalg.LinAlgError):
        return -np.inf
    if priors is None:
        return lml
    phi_l = hp.lengthscale**-2
    phi_f = 1.0 / hp.signal_var
    phi_n = 1.0 / hp.noise_var
    jacobian = math.log(2.0 * phi_l) + math.log(phi_f) + math.log(phi_n)
    return lml + log_prior(hp, priors) + jacobian


def mh_chain(log_target, eta0, steps, burn_in, scales, rng, adapt=True):
    """One random-walk MH chain in an unconstrained space.

    Proposals are independent Gaussians per coordinate; acceptance uses
    log-space arithmetic only. During burn-in (if adapt) the scale vector is
    multiplied up or down every ADAPT_WINDOW steps to push the window
    acceptance rate into [0.2, 0.5]; the scales are frozen afterwards so the
    retained draws come from a fixed kernel.

    Returns (kept_etas, kept_logp, kept_accepted, acceptance_rate).
    """
    eta = np.asarray(eta0, dtype=float).copy()
    scales = np.asarray(scales, dtype=float).copy()
    logp = log_target(eta)
    kept_etas = np.empty((steps - burn_in, eta.size))
    kept_logp = np.empty(steps - burn_in)
    kept_acc = np.zeros(steps - burn_in, dtype=bool)
    window_acc = 0
    post_acc = 0
    for step in range(steps):
        prop = eta + scales * rng.standard_normal(eta.size)
        logp_prop = log_target(prop)
        delta = logp_prop - logp
        accept = delta >= 0 or math.log(rng.uniform()) < delta
        if accept:
            eta, logp = prop, logp_prop
        if step < burn_in:
            if adapt:
                window_acc += accept
                if (step + 1) % ADAPT_WINDOW == 0:
                    rate = window_acc / ADAPT_WINDOW
                    if rate < ADAPT_LOW:
                        scales *= 0.7
                    elif rate > ADAPT_HIGH:
                        scales *= 1.3
                    window_acc = 0
        else:
            i = step - burn_in
            kept_etas[i] = eta
            kept_logp[i] = logp
            kept_acc[i] = accept
            post_acc += accept
    rate = post_acc / (steps - burn_in)
    return kept_etas, kept_logp, kept_acc, rate


def _draw_initial_eta(priors, rng):
    if priors is None:
        return rng.normal(0.0, 1.0, size=3)
    eta = np.empty(3)
    for i, prior in enumerate((priors.lengthscale, priors.signal_var, priors.noise_var)):
        half = 0.5 * prior.shape_a
        phi = rng.gamma(shape=half, scale=prior.omega / half)
        phi = max(phi, 1e-12)
        eta[i] = -0.5 * math.log(phi) if i == 0 else -math.log(phi)
    return eta


def mh_sample(X, y, priors, cfg, threads=1):
    """Sample the hyperparameter posterior with independent MH chains.

    Each chain owns an RNG stream spawned from (cfg.seed, chain index), so
    results are reproducible and chains are mutually independent; with
    threads > 1 the chains run concurrently (the result is identical either
    way, since nothing is shared). Initial points are drawn from the priors
    (standard normal in eta when priors is None), re-drawn if the target is
    -inf there.
    """
    cfg.validate()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise McmcError("empty training set")

    def target(eta):
        return log_posterior(X, y, _hp_from_eta(eta), priors)

    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)

    def run_chain(chain_idx):
        rng = np.random.default_rng(streams[chain_idx])
        eta0 = _draw_initial_eta(priors, rng)
        tries = 0
        while not np.isfinite(target(eta0)):
            tries += 1
            if tries > _MAX_INIT_TRIES:
                raise McmcError("could not find a finite-posterior starting point")
            eta0 = _draw_initial_eta(priors, rng)
        return mh_chain(
            target, eta0, cfg.steps, cfg.burn_in, cfg.proposal_scales, rng, adapt=cfg.adapt
        )

    if threads > 1 and cfg.chains > 1:
        with ThreadPoolExecutor(max_workers=min(threads, cfg.chains)) as pool:
            results = list(pool.map(run_chain, range(cfg.chains)))
    else:
        results = [run_chain(i) for i in range(cfg.chains)]

    draws, logps, accs, rates = [], [], [], []
    for kept, logp, acc, rate in results:
        draws.append([_hp_from_eta(e) for e in kept])
        logps.append(logp)
        accs.append(acc)
        rates.append(rate)
    return PosteriorSamples(
        draws=tuple(draws),
        log_posterior=tuple(logps),
        accepted=tuple(accs),
        acceptance_rate=tuple(rates),
        config=cfg,
    )


def _integrated_autocorr_time(x):
    """Geyer initial-positive-sequence estimate of the autocorrelation time.

    Sums adjacent autocorrelation pairs until the first negative pair. The
    result is floored at 1/len(x): anticorrelated chains may legitimately
    report tau < 1 (super-efficiency), but never a non-positive value.
    """
    x = np.asarray(x, dtype=float)
    m = x.size
    centered = x - x.mean()
    var = float(centered @ centered) / m
    if var == 0.0:
        return np.nan
    acov = np.correlate(centered, centered, mode="full")[m - 1 :] / m
    rho = acov / acov[0]
    tau = 0.0
    k = 0
    while 2 * k + 1 < m:
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair < 0:
            break
        tau += 2.0 * pair
        k += 1
    tau -= 1.0
    return max(tau, 1.0 / m)


def _split_rhat(chains):
    """Split-R-hat over a list of equal-length 1-d chains."""
    halves = []
    for c in chains:
        half = len(c) // 2
        if half < 2:
            return np.nan
        halves.append(np.asarray(c[:half], dtype=float))
        halves.append(np.asarray(c[half : 2 * half], dtype=float))
    seq = np.stack(halves)
    m, length = seq.shape
    means = seq.mean(axis=1)
    within = float(np.mean(seq.var(axis=1, ddof=1)))
    between = length * float(np.var(means, ddof=1))
    if within == 0.0:
        return np.nan
    var_plus = (length - 1) / length * within + between / length
    return math.sqrt(var_plus / within)


@dataclass(frozen=True)
class Diagnostics:
    ess: dict
    rhat: dict | None
    acceptance: tuple


def diagnostics(samples):
    """Effective sample size, split-R-hat, and acceptance per chain.

    R-hat needs at least two chains and is reported as None otherwise;
    zero-variance chains yield NaN entries rather than raising.
    """
    arr = samples.parameter_array()
    ess = {}
    for p, name in enumerate(PARAM_NAMES):
        total = 0.0
        for c in range(arr.shape[0]):
            tau = _integrated_autocorr_time(arr[c, :, p])
            if np.isnan(tau):
                total = np.nan
                break
            total += arr.shape[1] / tau
        ess[name] = total
    rhat = None
    if arr.shape[0] >= 2:
        rhat = {
            name: _split_rhat([arr[c, :, p] for c in range(arr.shape[0])])
            for p, name in enumerate(PARAM_NAMES)
        }
    return Diagnostics(ess=ess, rhat=rhat, acceptance=samples.acceptance_rate)


def predictive_mixture(X, y, samples, Xstar, subsample=25):
    """Bayesian predictive moments by mixing GP fits over posterior draws.

    Thins the pooled draws to `subsample` evenly spaced settings, fits one GP
    per setting, and combines moments: the mixture mean averages per-draw
    means, and the mixture variance adds the spread of those means to the
    averaged per-draw variance (law of total variance). Draws whose fit
    fails are skipped; it is an error if every draw fails. `samples` may be
    a PosteriorSamples or any sequence of Hyperparams.
    """
    pooled = samples.pooled() if hasattr(samples, "pooled") else list(samples)
    if not pooled:
        raise McmcError("no posterior draws to mix over")
    if subsample < 1:
        raise McmcError("subsample must be >= 1")
    count = min(subsample, len(pooled))
    idx = np.unique(np.linspace(0, len(pooled) - 1, count).round().astype(int))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    Xstar = np.atleast_2d(np.asarray(Xstar, dtype=float))

    means, varis = [], []
    for i in idx:
        try:
            model = fit(X, y, pooled[i])
        except GpError:
            continue
        pred = predict(model, Xstar)
        means.append(pred.mean)
        varis.append(pred.var)
    if not means:
        raise McmcError("every posterior draw produced an unusable fit")
    if len(means) == 1:
        return means[0], varis[0]
    means = np.stack(means)
    varis = np.stack(varis)
    mix_mean = means.mean(axis=0)
    mix_var = varis.mean(axis=0) + ((means - mix_mean) ** 2).mean(axis=0)
    return mix_mean, mix_var


def write_samples_csv(samples, path):
    """Export draws as CSV rows (chain, step, lengthscale, signal_var, noise_var, log_posterior, accepted)."""
    burn = samples.config.burn_in
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("chain,step,lengthscale,signal_var,noise_var,log_posterior,accepted\n")
        for c, chain in enumerate(samples.draws):
            for i, h in enumerate(chain):
                fh.write(
                    f"{c},{burn + i},{h.lengthscale:.17g},{h.signal_var:.17g},"
                    f"{h.noise_var:.17g},{samples.log_posterior[c][i]:.17g},"
                    f"{int(samples.accepted[c][i])}\n"
                )
