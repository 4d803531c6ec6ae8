"""Monte-Carlo verification of the Gaussian/Wick machinery.

Draws frequency-domain Gaussian amplitudes for the site variables with
the equilibrium cross-spectral densities of :mod:`localfield`, inverse
transforms to stationary real time series, forms the absorbed power
H(t) and the Lorentz force F(t) as quadratic forms, and estimates their
correlation integrals.  The sampling weight is sqrt(e^x/(e^x-1)^2):
classical Gaussian pairings of two such weights reproduce the quantum
Green-Kubo measure, and all amplitudes vanish as T -> 0.

Sampling is deterministic: per-sample counter-based streams derived
from (seed, sample index).
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import KB, HBAR
from .numerics import SpectralGrid, gk_weight
from .dipoles import Assembly
from .localfield import LocalFieldModel, _dag

__all__ = ["SampledEnsemble", "sample_fields", "gk_estimate", "kirkwood_estimate"]

_CLIP = 1e-12


@dataclass
class SampledEnsemble:
    """Time series of the fluxes and forces of a sampled cluster.

    H: (n_samples, 2, n_steps) absorbed power per object (W).
    F: (n_samples, 2, 3, n_steps) force per object (N).
    E_probe: (n_samples, 3, n_steps) local field at the first site,
    kept for the two- and four-point sampler checks.
    """
    n_samples: int
    dt: float
    n_steps: int
    seed: int
    T: float
    H: np.ndarray
    F: np.ndarray
    E_probe: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _fft_grid(T, n_steps, x_max=60.0):
    """Uniform FFT-compatible frequency mesh whose Nyquist frequency
    clears the thermal band edge x = x_max."""
    w_edge = x_max * KB * T / HBAR
    dt = np.pi / (1.1 * w_edge)
    m = n_steps // 2
    dw = 2.0 * np.pi / (n_steps * dt)
    nodes = dw * np.arange(1, m)
    return dt, dw, nodes


def _output_csd(lf, wt):
    """CSD of the sampled channels [p, E_loc, dE_x, dE_y, dE_z]."""
    asm = lf.asm
    n3 = asm.G.shape[-1]
    env = lf.env_csd(wt)
    Sfl = lf.matter_csd(1, wt) + lf.matter_csd(2, wt)
    Lp = lf.Lp
    MpE = Lp @ lf.A0
    nw = asm.k.size
    maps_pfl = [Lp, lf.C @ Lp] + [lf.Dm[i] @ Lp for i in range(3)]
    maps_E0 = [MpE, lf.Lam] + [lf.Dm[i] @ MpE for i in range(3)]
    nch = 5 * n3
    S = np.zeros((nw, nch, nch), dtype=complex)
    for r in range(5):
        rs = slice(r * n3, (r + 1) * n3)
        for c in range(5):
            cs = slice(c * n3, (c + 1) * n3)
            block = maps_pfl[r] @ Sfl @ _dag(maps_pfl[c])
            block = block + maps_E0[r] @ env["EE"] @ _dag(maps_E0[c])
            if r >= 2:
                block = block + env["dEE"][r - 2] @ _dag(maps_E0[c])
            if c >= 2:
                block = block + maps_E0[r] @ env["EdE"][c - 2]
            if r >= 2 and c >= 2:
                block = block + env["dEdE"][r - 2][c - 2]
            S[:, rs, cs] = block
    return S


def _factor_psd(S):
    """PSD factor via eigendecomposition; negative eigenvalues below
    _CLIP of the maximum are clipped to zero (count returned).

    The channels span many decades (dipole moments against field
    gradients), so the matrix is whitened by its diagonal first; the
    factorization then works on the well-conditioned correlation
    matrix and the scales are restored afterwards."""
    Sh = 0.5 * (S + _dag(S))
    diag = np.diagonal(Sh, axis1=-2, axis2=-1).real
    dead = diag <= 0  # zero-variance channels carry no amplitude at all
    d = np.sqrt(np.abs(diag))
    d = np.where(dead, 1.0, d)
    Sw = Sh / (d[:, :, None] * d[:, None, :])
    vals, vecs = np.linalg.eigh(Sw)
    vmax = np.max(np.abs(vals), axis=-1, keepdims=True)
    n_clipped = int(np.sum(vals < -_CLIP * vmax))
    vals = np.clip(vals, 0.0, None)
    L = d[:, :, None] * vecs * np.sqrt(vals)[:, None, :]
    L[dead] = 0.0
    return L, n_clipped


def sample_fields(cluster, T, n_steps=2**14, n_samples=128, seed=0, x_max=60.0):
    """Sample equilibrium time series of H(t) and F(t) for a cluster.

    Parameters
    ----------
    cluster : ScatterCluster
    T : float
        Equilibrium temperature (K), > 0.
    n_steps : int
        Series length, a power of two (uniform FFT mesh).
    n_samples : int
        Ensemble size.
    seed : int
        Base seed; sample s uses the counter-based stream (seed, s).
    x_max : float
        Thermal band edge in x = hbar w/(kB T) covered below Nyquist.

    Returns
    -------
    SampledEnsemble

    Notes
    -----
    The force series is the equal-spectral-content reduced form of the
    dipole Lorentz force (see the inline note); its correlation
    integral equals that of (p . grad) E + dp/dt x B.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if n_steps & (n_steps - 1):
        raise ValueError("n_steps must be a power of two (uniform FFT mesh)")
    dt, dw, nodes = _fft_grid(T, n_steps, x_max)
    grid = SpectralGrid(nodes=nodes, weights=np.full(nodes.size, dw),
                        temperature_scale=float(T))
    asm = Assembly(cluster, grid)
    lf = LocalFieldModel(asm)
    wt = np.sqrt(gk_weight(nodes, T))
    S = _output_csd(lf, wt)
    L, n_clipped = _factor_psd(S * (dw / (2.0 * np.pi)))

    n3 = asm.G.shape[-1]
    n_sites = n3 // 3
    m = nodes.size
    omega = nodes
    half = n_steps // 2 + 1

    site_sel = {o: asm.cluster.site_indices(o) for o in (1, 2)}
    H = np.zeros((n_samples, 2, n_steps))
    F = np.zeros((n_samples, 2, 3, n_steps))
    E_probe = np.zeros((n_samples, 3, n_steps))
    def series(spectral):
        # x(t_k) = sum_m 2 Re[c_m e^{-i w_m t_k}]: irfft of conj(c)
        Z = np.zeros((spectral.shape[1], half), dtype=complex)
        Z[:, 1:m + 1] = np.conj(spectral).T
        return n_steps * np.fft.irfft(Z, n=n_steps, axis=1)

    for s in range(n_samples):
        rng = np.random.Generator(np.random.Philox(key=[seed, s]))
        zeta = (rng.standard_normal((m, L.shape[-1]))
                + 1j * rng.standard_normal((m, L.shape[-1]))) / np.sqrt(2.0)
        amps = np.einsum("wij,wj->wi", L, zeta)

        a_p = amps[:, 0:n3]
        a_E = amps[:, n3:2 * n3]
        a_dE = [amps[:, (2 + i) * n3:(3 + i) * n3] for i in range(3)]

        shape = (n_sites, 3, n_steps)
        p_t = series(a_p).reshape(shape)
        pdot_t = series(-1j * omega[:, None] * a_p).reshape(shape)
        E_t = series(a_E).reshape(shape)
        dE_t = [series(a_dE[i]).reshape(shape) for i in range(3)]

        E_probe[s] = E_t[0]
        for obj in (1, 2):
            sid = site_sel[obj]
            if not sid:
                continue
            H[s, obj - 1] = np.einsum("smt,smt->t", pdot_t[sid], E_t[sid])
            for i in range(3):
                # reduced Lorentz force sum_m p_m d_i E_m: the magnetic
                # term's beat components cancel this against the gradient
                # force at matched frequencies, so the correlation
                # integral is identical while the 1/omega amplification
                # of B(t) on a discrete mesh is avoided
                F[s, obj - 1, i] = np.einsum("smt,smt->t", p_t[sid],
                                             dE_t[i][sid])

    return SampledEnsemble(
        n_samples=n_samples, dt=dt, n_steps=n_steps, seed=seed, T=float(T),
        H=H, F=F, E_probe=E_probe,
        diagnostics={"n_clipped": n_clipped, "dw": dw, "m_freq": m},
    )


def _correlation(x, y):
    """Unbiased cross-correlation (1/(n-tau)) sum_t x(t+tau) y(t), via
    zero-padded FFT, for tau = 0..n//2."""
    n = x.shape[-1]
    pad = 2 * n
    X = np.fft.rfft(x, pad)
    Y = np.fft.rfft(y, pad)
    c = np.fft.irfft(X * np.conj(Y), pad)[..., :n // 2]
    return c / (n - np.arange(n // 2))


def _running_integral(corr_samples, dt):
    """Trapezoid running integral per sample; returns (mean, sem)."""
    n_samples = corr_samples.shape[0]
    run = (np.cumsum(corr_samples, axis=1)
           - 0.5 * corr_samples[:, :1] - 0.5 * corr_samples) * dt
    mean = run.mean(axis=0)
    sem = run.std(axis=0, ddof=1) / np.sqrt(n_samples)
    return mean, sem


def _find_plateau(mean, sem, rel_floor):
    """First decade [tau, 10 tau] over which the running integral varies
    by less than its standard error (drift between the means of the two
    logarithmic half-windows; a small relative floor keeps the one-sigma
    test from rejecting true plateaus by coin flip).  Returns (lo, hi);
    raises RuntimeError when no plateau exists in the series."""
    n_tau = mean.size
    idx = 4
    while 10 * idx < n_tau:
        lo, mid, hi = idx, int(np.sqrt(10) * idx), 10 * idx
        value = float(np.mean(mean[lo:hi]))
        drift = abs(np.mean(mean[lo:mid]) - np.mean(mean[mid:hi]))
        if drift <= max(sem[hi], rel_floor * abs(value), 1e-300):
            return lo, hi
        idx = max(idx + 1, int(1.5 * idx))
    raise RuntimeError("no plateau found within the series length")


def _plateau_integral(corr_samples, dt, rel_floor=0.02):
    """Plateau value of int_0^t C dt' with its standard error."""
    mean, sem = _running_integral(corr_samples, dt)
    lo, hi = _find_plateau(mean, sem, rel_floor)
    return float(np.mean(mean[lo:hi])), float(sem[hi]), (lo + hi) // 2


def gk_estimate(ensemble):
    """Conductance matrix estimate from the sampled flux series.

    Returns (k, k_err): 2x2 arrays, k[a, b] estimating
    (1/kB T^2) int_0^inf dt <H^(a)(t) H^(b)(0)>, with standard errors.
    """
    T = ensemble.T
    k = np.zeros((2, 2))
    k_err = np.zeros((2, 2))
    # per-sample mean subtraction kills the zero-beat (DC) component of
    # the quadratic form, which on a discrete mesh would otherwise add a
    # non-decaying floor to the correlation
    H = ensemble.H - ensemble.H.mean(axis=2, keepdims=True)
    for a in range(2):
        for b in range(2):
            corr = _correlation(H[:, a], H[:, b])
            val, err, _ = _plateau_integral(corr, ensemble.dt)
            k[a, b] = val / (KB * T**2)
            k_err[a, b] = err / (KB * T**2)
    return k, k_err


def kirkwood_estimate(ensemble):
    """Friction tensor estimate from the sampled force series.

    Returns (gamma, gamma_err), shape (2, 2, 3, 3): gamma[a, b, i, j]
    estimating (1/kB T) int_0^inf dt <dF_i^(b)(t) dF_j^(a)(0)>.

    The integration window for each object pair is set by the plateau
    of the trace correlator sum_i <F_i^(b)(t) F_i^(a)(0)> (one physical
    correlation timescale per pair); zero-signal components inherit it.
    """
    T = ensemble.T
    F = ensemble.F - ensemble.F.mean(axis=3, keepdims=True)
    gamma = np.zeros((2, 2, 3, 3))
    gamma_err = np.zeros((2, 2, 3, 3))
    for a in range(2):
        for b in range(2):
            corr_tr = sum(_correlation(F[:, b, i], F[:, a, i]) for i in range(3))
            mean_tr, sem_tr = _running_integral(corr_tr, ensemble.dt)
            lo, hi = _find_plateau(mean_tr, sem_tr, rel_floor=0.04)
            for i in range(3):
                for j in range(3):
                    corr = _correlation(F[:, b, i], F[:, a, j])
                    mean, sem = _running_integral(corr, ensemble.dt)
                    gamma[a, b, i, j] = np.mean(mean[lo:hi]) / (KB * T)
                    gamma_err[a, b, i, j] = sem[hi] / (KB * T)
    return gamma, gamma_err
