"""Linear dynamical systems with per-agent input blocks.

State evolves as x_{t+1} = A x_t + B u_t + w_t with x_0 = 0, where the joint
input map B is the column concatenation of per-agent blocks B_i and w_t is an
oblivious (control-independent) disturbance. Observations, when present, are
y^i_t = C_i x_t + e^i_t.
"""

import numpy as np

from . import rng

PROFILES = ("gaussian", "random_walk", "sinusoidal", "zero", "custom")

SINE_PHASES = np.array([12.0, 21.0, 3.0, 42.0, 1.0])


class StabilityError(RuntimeError):
    """System failed the spectral-radius certification."""

    def __init__(self, message, spectral_radius):
        super().__init__(message)
        self.spectral_radius = spectral_radius


def _as_matrix(M, name):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix, got shape {M.shape}")
    return M


class LinearSystem:
    """Immutable LTI system A, [B_1 ... B_k], optional per-agent C_i."""

    def __init__(self, A, B_blocks, C_blocks=None):
        A = _as_matrix(A, "A")
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if len(B_blocks) < 1:
            raise ValueError("need at least one agent input block")
        B_blocks = [_as_matrix(B, f"B_{i}") for i, B in enumerate(B_blocks)]
        for i, Bi in enumerate(B_blocks):
            if Bi.shape[0] != A.shape[0]:
                raise ValueError(f"B_{i} has {Bi.shape[0]} rows, expected {A.shape[0]}")
        self.A = A
        self.B_blocks = B_blocks
        self.B = np.hstack(B_blocks)
        if C_blocks is not None:
            C_blocks = [_as_matrix(C, f"C_{i}") for i, C in enumerate(C_blocks)]
            if len(C_blocks) != len(B_blocks):
                raise ValueError("need one C block per agent")
            for i, Ci in enumerate(C_blocks):
                if Ci.shape[1] != A.shape[0]:
                    raise ValueError(f"C_{i} has {Ci.shape[1]} cols, expected {A.shape[0]}")
        self.C_blocks = C_blocks
        for M in [self.A, self.B] + self.B_blocks + (list(C_blocks) if C_blocks else []):
            M.setflags(write=False)

    @property
    def d_x(self):
        return self.A.shape[0]

    @property
    def d_u(self):
        return self.B.shape[1]

    @property
    def k(self):
        return len(self.B_blocks)

    @property
    def input_dims(self):
        return [B.shape[1] for B in self.B_blocks]

    def input_slice(self, agent):
        """Column range of agent's block inside the joint control vector."""
        if not 0 <= agent < self.k:
            raise IndexError(f"agent {agent} out of range for k={self.k}")
        start = sum(self.input_dims[:agent])
        return slice(start, start + self.input_dims[agent])

    def observation(self, agent):
        if self.C_blocks is None:
            raise ValueError("system has no observation maps")
        if not 0 <= agent < self.k:
            raise IndexError(f"agent {agent} out of range for k={self.k}")
        return self.C_blocks[agent]


class StrongStabilityCert:
    """Empirical decay certificate: ||A^n|| <= kappa^2 (1 - gamma)^n."""

    def __init__(self, kappa, gamma, spectral_radius):
        self.kappa = kappa
        self.gamma = gamma
        self.spectral_radius = spectral_radius

    def __repr__(self):
        return (f"StrongStabilityCert(kappa={self.kappa:.6g}, gamma={self.gamma:.6g}, "
                f"spectral_radius={self.spectral_radius:.6g})")


class DisturbanceTrace:
    """Oblivious disturbance sequence: a pure function of (profile, seed, T, dims)."""

    def __init__(self, w, profile="custom", seed=0, e=None):
        w = np.asarray(w, dtype=float)
        if w.ndim != 2:
            raise ValueError("w must be a (T, d_x) array")
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}")
        self.w = w
        self.e = e
        self.profile = profile
        self.seed = seed
        self.w.setflags(write=False)

    @property
    def T(self):
        return self.w.shape[0]

    def max_norm(self):
        return float(np.max(np.linalg.norm(self.w, axis=1))) if self.T else 0.0


class QuadCost:
    """Quadratic cost c(x, u) = x'Qx + u'Ru with PSD Q, R."""

    def __init__(self, Q, R, overrides=None):
        self.Q = _as_matrix(Q, "Q")
        self.R = _as_matrix(R, "R")
        self.overrides = dict(overrides) if overrides else {}
        self.Q.setflags(write=False)
        self.R.setflags(write=False)

    def at(self, t):
        return self.overrides.get(t, self)

    def __call__(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return float(x @ self.Q @ x + u @ self.R @ u)

    def grad_x(self, x, u):
        return 2.0 * (self.Q @ x)

    def grad_u(self, x, u):
        return 2.0 * (self.R @ u)

    def bound_constant(self):
        """C such that 0 <= c(x,u) <= C D^2 whenever ||x||,||u|| <= D."""
        return float(np.linalg.eigvalsh(self.Q)[-1] + np.linalg.eigvalsh(self.R)[-1])


def step_dynamics(sys, x, u, w):
    """One transition: A x + [B_1 ... B_k] u + w."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != (sys.d_x,):
        raise ValueError(f"state has shape {x.shape}, expected ({sys.d_x},)")
    if u.shape != (sys.d_u,):
        raise ValueError(f"control has shape {u.shape}, expected ({sys.d_u},)")
    if w.shape != (sys.d_x,):
        raise ValueError(f"disturbance has shape {w.shape}, expected ({sys.d_x},)")
    return sys.A @ x + sys.B @ u + w


def natures_x(sys, w_trace):
    """Zero-control state sequence: xs[0] = 0, xs[t+1] = A xs[t] + w[t].

    Returns an array of shape (T+1, d_x) for a length-T disturbance trace.
    """
    w = w_trace.w if isinstance(w_trace, DisturbanceTrace) else np.asarray(w_trace, dtype=float)
    if w.ndim != 2 or w.shape[1] != sys.d_x:
        raise ValueError(f"disturbance trace must be (T, {sys.d_x})")
    T = w.shape[0]
    xs = np.zeros((T + 1, sys.d_x))
    for t in range(T):
        xs[t + 1] = sys.A @ xs[t] + w[t]
    return xs


def natures_y(sys, w_trace, e_trace, agent):
    """Zero-control observation sequence for one agent: C_i x^nat_t + e^i_t."""
    C = sys.observation(agent)
    xs = natures_x(sys, w_trace)
    ys = xs @ C.T
    if e_trace is not None:
        e = np.asarray(e_trace, dtype=float)
        if e.shape != ys.shape:
            raise ValueError(f"e trace must have shape {ys.shape}, got {e.shape}")
        ys = ys + e
    return ys


def spectral_radius(A):
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def certify_stability(sys_or_A, margin=1e-9, n_powers=200):
    """Certify rho(A) < 1 and fit decay constants ||A^n|| <= kappa^2 (1-gamma)^n.

    The fit takes 1 - gamma as the spectral radius (floored at 1e-6 so nilpotent
    systems stay well defined) and absorbs transient growth into kappa, maximizing
    over powers n <= n_powers. Raises StabilityError when rho(A) >= 1 - margin.
    """
    A = sys_or_A.A if isinstance(sys_or_A, LinearSystem) else _as_matrix(sys_or_A, "A")
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    rho = spectral_radius(A)
    if rho >= 1.0 - margin:
        raise StabilityError(f"spectral radius {rho:.6g} >= 1 - {margin:g}", rho)
    base = max(rho, 1e-6)
    kappa_sq = 1.0
    P = np.eye(A.shape[0])
    scale = 1.0
    for _ in range(n_powers):
        P = A @ P
        scale *= base
        nrm = np.linalg.norm(P, 2)
        if nrm == 0.0 or scale == 0.0:
            break
        kappa_sq = max(kappa_sq, nrm / scale)
    return StrongStabilityCert(kappa=float(np.sqrt(kappa_sq)), gamma=1.0 - base,
                               spectral_radius=rho)


def generate_disturbances(profile, seed, T, d_x):
    """Seeded disturbance trace of shape (T, d_x) for one of the named profiles.

    gaussian    : i.i.d. standard normal entries.
    random_walk : w_t = w_{t-1} + X_t with standard normal steps, w before the
                  trace taken as 0 (so w[0] is the first step).
    sinusoidal  : w[t, i] = sin(2 t + phase_i) with phases cycled from a fixed
                  length-5 table.
    zero        : all zeros.

    Traces are prefix-stable in T and bit-identical for equal seeds.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if profile == "zero":
        w = np.zeros((T, d_x))
    elif profile == "gaussian":
        w = rng.normals(seed, T * d_x).reshape(T, d_x)
    elif profile == "random_walk":
        steps = rng.normals(seed, T * d_x).reshape(T, d_x)
        w = np.cumsum(steps, axis=0)
    elif profile == "sinusoidal":
        phases = SINE_PHASES[np.arange(d_x) % len(SINE_PHASES)]
        t = np.arange(T)[:, None]
        w = np.sin(2.0 * t + phases[None, :])
    elif profile == "custom":
        raise ValueError("custom traces are constructed directly via DisturbanceTrace")
    else:
        raise ValueError(f"unknown profile {profile!r}")
    return DisturbanceTrace(w, profile=profile, seed=seed)
