"""Adaptive Gauss-Kronrod quadrature for half-line oscillatory integrands.

The integrand is evaluated over fixed-width panels marched from t = 0 and
truncated at the first window where its envelope stays below
``tail_eps * tail_scale`` for a contiguous span (the first deep-decay
window).  For quasi-periodic traces of finite discrete baths this is the
coarse-grained Markovian value; later recurrences are finite-size artifacts
and are deliberately excluded.  A global refinement pass then drives the
accumulated Kronrod error under max(abs_tol, rel_tol * |value|).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonconvergenceError

# Kronrod-15 abscissae/weights and the embedded Gauss-7 weights (QUADPACK).
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_W_KRON = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_W_GAUSS = np.zeros(15)
_W_GAUSS[1:14:2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])

_MAX_INTERVALS = 120_000
_CHUNK = 64


@dataclass
class QuadratureSettings:
    """Error and tail-detection controls for the half-line integral."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    tail_eps: float = 1e-10
    t_max_cap: float = 1e6
    damping_eta: float | None = None


@dataclass
class IntegralResult:
    value: complex
    error: float
    t_end: float
    n_eval: int
    damped: bool = False
    tol_met: bool = True

    def __complex__(self):
        return complex(self.value)


def _eval_panels(f, a, b, envelope=None):
    """Evaluate K15/G7 on a batch of intervals; returns (val, err, env).

    ``envelope``, when given, is a separate function whose magnitude drives
    tail detection (so related integrals truncate at the same window).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=complex).reshape(pts.shape)
    ik = (vals @ _W_KRON) * half
    ig = (vals @ _W_GAUSS) * half
    err = np.abs(ik - ig)
    if envelope is None:
        env = np.max(np.abs(vals), axis=1)
    else:
        evals = np.abs(np.asarray(envelope(pts.ravel()))).reshape(pts.shape)
        env = np.max(evals, axis=1)
    return ik, err, env, pts.size


def half_line_integral(f, settings=None, scale=1.0, quiet_span=None,
                       tail_scale=1.0, envelope=None):
    """Integral of a decaying complex-valued f over [0, inf).

    Parameters
    ----------
    f : callable
        Vectorized: maps a float array of times to a complex array.
    settings : QuadratureSettings
        Tolerances, tail threshold, time cap and optional damping e^{-eta t}.
    scale : float
        Characteristic oscillation period of f; sets the panel width.
    quiet_span : float
        Duration the envelope must stay below threshold before stopping
        (default 8 * scale).
    tail_scale : float
        Magnitude scale of the tail threshold, tail_eps * tail_scale.
    envelope : callable, optional
        Separate function whose magnitude drives tail detection.  A family of
        integrals that must truncate consistently (a population rate and its
        per-mode dissipation partners) passes the shared plain-trace product
        here, so all of them stop at the same deep-decay window.

    Raises
    ------
    NonconvergenceError
        If the envelope never stays under the threshold before t_max_cap.
    """
    settings = settings or QuadratureSettings()
    eta = settings.damping_eta
    if eta is not None:
        g = lambda t: np.asarray(f(t), dtype=complex) * np.exp(-eta * np.asarray(t))
        if envelope is None:
            g_env = None
        else:
            g_env = lambda t: np.asarray(envelope(t)) * np.exp(-eta * np.asarray(t))
    else:
        g = f
        g_env = envelope

    width = max(scale, 1e-12)
    if quiet_span is None:
        quiet_span = 8.0 * width
    threshold = settings.tail_eps * tail_scale

    a_acc = []
    b_acc = []
    val_acc = []
    err_acc = []
    n_eval = 0
    t = 0.0
    quiet_len = 0.0
    done = False

    while not done:
        n_panels = min(_CHUNK, max(1, int(np.ceil((settings.t_max_cap - t) / width))))
        edges = t + width * np.arange(n_panels + 1)
        edges = np.minimum(edges, settings.t_max_cap)
        a, b = edges[:-1], edges[1:]
        val, err, env, ne = _eval_panels(g, a, b, envelope=g_env)
        n_eval += ne

        cut = n_panels
        for i in range(n_panels):
            if env[i] < threshold:
                quiet_len += b[i] - a[i]
                if quiet_len >= quiet_span:
                    cut = i + 1
                    done = True
                    break
            else:
                quiet_len = 0.0
        a_acc.append(a[:cut])
        b_acc.append(b[:cut])
        val_acc.append(val[:cut])
        err_acc.append(err[:cut])
        t = b[cut - 1]

        if not done and t >= settings.t_max_cap:
            hint = "" if eta is not None else " (set damping_eta to regularize)"
            raise NonconvergenceError(
                f"integrand envelope never stayed below tail_eps*tail_scale="
                f"{threshold:g} before t_max_cap={settings.t_max_cap:g}{hint}",
                value=complex(np.sum(np.concatenate(val_acc))), t_end=t,
            )

    a = np.concatenate(a_acc)
    b = np.concatenate(b_acc)
    val = np.concatenate(val_acc)
    err = np.concatenate(err_acc)

    # global refinement over the accepted window
    tol_met = True
    for _ in range(60):
        total = np.sum(val)
        err_total = float(np.sum(err))
        target = max(settings.abs_tol, settings.rel_tol * abs(total))
        if err_total <= target:
            break
        if a.size > _MAX_INTERVALS:
            tol_met = False
            break
        order = np.argsort(err)[::-1]
        n_split = max(8, int(0.05 * a.size))
        worst = order[:n_split]
        worst = worst[err[worst] > target / max(a.size, 1)]
        if worst.size == 0:
            break
        keep = np.ones(a.size, dtype=bool)
        keep[worst] = False
        mid = 0.5 * (a[worst] + b[worst])
        na = np.concatenate([a[worst], mid])
        nb = np.concatenate([mid, b[worst]])
        nval, nerr, _, ne = _eval_panels(g, na, nb)
        n_eval += ne
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
    else:
        tol_met = False

    total = complex(np.sum(val))
    # the ignored tail oscillates under the threshold over the quiet span
    err_total = float(np.sum(err)) + threshold * quiet_span
    if err_total > max(settings.abs_tol, settings.rel_tol * abs(total),
                       2.0 * threshold * quiet_span):
        tol_met = False
    return IntegralResult(value=total, error=err_total, t_end=float(t),
                          n_eval=n_eval, damped=eta is not None, tol_met=tol_met)
