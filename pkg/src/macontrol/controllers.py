"""Online controllers: multi-agent and single-agent gradient controllers over
disturbance-action policies, plus LQR and H-infinity linear baselines.

The learned controllers share one protocol per step: observe the state (which
pins down the previous disturbance exactly), commit a control, record the joint
control they can see, then update their policy parameters through a policy
evaluation oracle. The multi-agent controller gives each agent its own learner
fed by a local oracle that holds the recorded controls of everyone else fixed;
the single-agent controller regenerates the whole control window from its own
policy, which is what breaks when an actuator stops obeying it.

Open-loop unstable plants are handled by wrapping them with a shared
stabilizing feedback: learners then control the stable closed loop, and the
reported cost charges the total applied control (baseline plus learned part).
"""

import numpy as np

from .lds import LinearSystem, QuadCost, certify_stability, spectral_radius
from .oco import BallDomain, LearnerState
from .peo import (MarkovOperator, PeoContext, build_markov, joint_peo_grad,
                  local_peo_grad, recover_disturbance)
from .policies import LinearFeedback, stack_window


class NotStabilizableError(RuntimeError):
    pass


class InfeasibleError(RuntimeError):
    def __init__(self, message, gamma_range):
        super().__init__(message)
        self.gamma_range = gamma_range


def lqr_synthesize(sys, Q, R, tol=1e-10, max_iter=100_000):
    """Infinite-horizon LQR gain via the Riccati fixed-point iteration.

    Iterates P <- Q + A'PA - A'PB (R + B'PB)^{-1} B'PA from P = Q until the
    relative change drops below tol; K = (R + B'PB)^{-1} B'PA.
    """
    A, B = sys.A, sys.B
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    P = Q.copy()
    for _ in range(max_iter):
        BtP = B.T @ P
        K = np.linalg.solve(R + BtP @ B, BtP @ A)
        P_new = Q + A.T @ P @ (A - B @ K)
        P_new = 0.5 * (P_new + P_new.T)
        if not np.all(np.isfinite(P_new)):
            raise NotStabilizableError("Riccati iteration diverged")
        if np.linalg.norm(P_new - P) <= tol * max(1.0, np.linalg.norm(P_new)):
            K = np.linalg.solve(R + B.T @ P_new @ B, B.T @ P_new @ A)
            if spectral_radius(A - B @ K) >= 1.0:
                raise NotStabilizableError("converged gain does not stabilize")
            return LinearFeedback(K)
        P = P_new
    raise NotStabilizableError(f"no convergence after {max_iter} iterations")


def _game_riccati(A, B, Q, R, gamma, tol=1e-12, max_iter=100_000):
    """Fixed point of P <- Q + A'P (I + (B R^{-1} B' - gamma^{-2} I) P)^{-1} A.

    Returns P when the iteration converges with I - gamma^{-2} P positive
    definite, else None. gamma = inf reduces to the LQR equation.
    """
    d = A.shape[0]
    inv_g2 = 0.0 if np.isinf(gamma) else 1.0 / gamma**2
    G = B @ np.linalg.solve(R, B.T) - inv_g2 * np.eye(d)
    P = Q.copy()
    for _ in range(max_iter):
        try:
            core = np.linalg.solve((np.eye(d) + G @ P).T, P.T).T
        except np.linalg.LinAlgError:
            return None
        P_new = Q + A.T @ core @ A
        P_new = 0.5 * (P_new + P_new.T)
        if not np.all(np.isfinite(P_new)) or np.linalg.norm(P_new) > 1e12:
            return None
        if np.linalg.norm(P_new - P) <= tol * max(1.0, np.linalg.norm(P_new)):
            P = P_new
            break
        P = P_new
    else:
        return None
    if inv_g2 > 0.0 and np.min(np.linalg.eigvalsh(np.eye(d) - inv_g2 * P)) <= 0.0:
        return None
    return P


def _hinf_gain(A, B, R, P, gamma):
    d = A.shape[0]
    inv_g2 = 0.0 if np.isinf(gamma) else 1.0 / gamma**2
    G = B @ np.linalg.solve(R, B.T) - inv_g2 * np.eye(d)
    Lam = np.eye(d) + G @ P
    return np.linalg.solve(R, B.T) @ np.linalg.solve(Lam.T, P.T).T @ A


def hinf_synthesize(sys, Q, R, gamma_range=(1e-2, 1e6), tol=1e-3):
    """State-feedback H-infinity gain at the smallest feasible attenuation level.

    Bisects gamma over gamma_range; a level is feasible when the game Riccati
    iteration converges with I - gamma^{-2} P positive definite. Returns
    (LinearFeedback, gamma). As gamma grows the gain approaches the LQR gain.
    """
    A, B = sys.A, sys.B
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    lo, hi = gamma_range
    P_hi = _game_riccati(A, B, Q, R, hi)
    if P_hi is None:
        raise InfeasibleError(f"no feasible gamma in {gamma_range}", gamma_range)
    P_lo = _game_riccati(A, B, Q, R, lo)
    if P_lo is not None:
        return LinearFeedback(_hinf_gain(A, B, R, P_lo, lo)), lo
    best_gamma, best_P = hi, P_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        P_mid = _game_riccati(A, B, Q, R, mid)
        if P_mid is not None:
            hi, best_gamma, best_P = mid, mid, P_mid
        else:
            lo = mid
    return LinearFeedback(_hinf_gain(A, B, R, best_P, best_gamma)), best_gamma


def hinf_gain_at(sys, Q, R, gamma):
    """Gain at a fixed attenuation level; raises when the level is infeasible."""
    P = _game_riccati(sys.A, sys.B, np.asarray(Q, dtype=float),
                      np.asarray(R, dtype=float), gamma)
    if P is None:
        raise InfeasibleError(f"gamma = {gamma} infeasible", (gamma, gamma))
    return LinearFeedback(_hinf_gain(sys.A, sys.B, np.asarray(R, dtype=float), P, gamma))


class WrappedCost:
    """Physical cost seen through a baseline wrap: the learned control v rides
    on top of -Kx, so c(x, v) = x'Qx + (v - Kx)' R (v - Kx)."""

    def __init__(self, Q, R, K):
        self.Q = np.asarray(Q, dtype=float)
        self.R = np.asarray(R, dtype=float)
        self.K = np.asarray(K, dtype=float)

    def at(self, t):
        return self

    def __call__(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        tot = v - self.K @ x
        return float(x @ self.Q @ x + tot @ self.R @ tot)

    def grad_x(self, x, v):
        tot = v - self.K @ x
        return 2.0 * (self.Q @ x) - 2.0 * (self.K.T @ (self.R @ tot))

    def grad_u(self, x, v):
        return 2.0 * (self.R @ (v - self.K @ x))

    def bound_constant(self):
        lam_q = np.linalg.eigvalsh(self.Q)[-1]
        lam_r = np.linalg.eigvalsh(self.R)[-1]
        return float(lam_q + lam_r * (1.0 + np.linalg.norm(self.K, 2)) ** 2)

    def joint_quadratic(self):
        """PSD S with c(x, v) = [x; v]' S [x; v]."""
        d_x, d_u = self.K.shape[1], self.K.shape[0]
        S = np.zeros((d_x + d_u, d_x + d_u))
        S[:d_x, :d_x] = self.Q + self.K.T @ self.R @ self.K
        S[:d_x, d_x:] = -self.K.T @ self.R
        S[d_x:, :d_x] = -self.R @ self.K
        S[d_x:, d_x:] = self.R
        return S


def quad_joint_form(cost, d_x, d_u):
    """PSD matrix of a quadratic cost over the stacked (x, u) vector."""
    if hasattr(cost, "joint_quadratic"):
        return cost.joint_quadratic()
    if isinstance(cost, QuadCost):
        S = np.zeros((d_x + d_u, d_x + d_u))
        S[:d_x, :d_x] = cost.Q
        S[d_x:, d_x:] = cost.R
        return S
    raise TypeError(f"no joint quadratic form for {type(cost).__name__}")


class StabilizedPlant:
    """A plant together with a shared stabilizing baseline K.

    Learned controllers see the closed loop A - BK as their system and command
    the residual v; the plant applies -Kx + v. Disturbance recovery on the
    closed loop returns the same w as on the raw plant.
    """

    def __init__(self, sys, K):
        K_mat = K.K if isinstance(K, LinearFeedback) else np.asarray(K, dtype=float)
        A_cl = sys.A - sys.B @ K_mat
        self.cert = certify_stability(A_cl)
        self.raw = sys
        self.K = K_mat
        self.closed = LinearSystem(A_cl, sys.B_blocks, sys.C_blocks)

    def total_control(self, x, v):
        return -self.K @ x + v

    def wrap_cost(self, cost):
        return WrappedCost(cost.Q, cost.R, self.K)


def stabilize_and_wrap(sys, K):
    return StabilizedPlant(sys, K)


class MagpcController:
    """Multi-agent gradient controller: one projected-OGD learner per agent.

    Agents play zero for the first T_b = m + h steps while disturbances
    accumulate, then gradient-step their policy matrices through local policy
    evaluation oracles built from the controls everyone actually applied.
    """

    records_applied = True

    def __init__(self, system, cost, m, h, Tb=None, radius=10.0, schedule=None):
        self.system = system
        self.cost = cost
        self.m = int(m)
        self.h = int(h)
        self.Tb = int(Tb) if Tb is not None else self.m + self.h
        self.markov = build_markov(system, h)
        self.k = system.k
        self.learners = [
            LearnerState(BallDomain(radius, (d, m * system.d_x)), step_schedule=schedule)
            for d in system.input_dims
        ]
        self.thetas = [[] for _ in range(self.k)]
        self.ws = []
        self.feat_hist = []
        self.us = []
        self.xnat_hist = [np.zeros(system.d_x)]
        self._x_prev = None

    def observe(self, t, x):
        x = np.asarray(x, dtype=float)
        if t > 0:
            w = recover_disturbance(self.system, self._x_prev, self.us[t - 1], x)
            self.ws.append(w)
            self.xnat_hist.append(self.system.A @ self.xnat_hist[-1] + w)
        self._x_prev = x

    def act(self, t):
        feats = stack_window(self.ws[max(0, t - self.m):t], self.m, self.system.d_x)
        self.feat_hist.append(feats)
        parts = []
        for i, ln in enumerate(self.learners):
            theta = np.zeros(ln.domain.shape) if t < self.Tb else ln.iterate.copy()
            self.thetas[i].append(theta)
            parts.append(theta @ feats)
        return np.concatenate(parts)

    def record(self, t, u):
        self.us.append(np.asarray(u, dtype=float).copy())

    def context(self, t):
        return PeoContext(self.markov, self.cost.at(t), self.xnat_hist[t],
                          self.us[t - self.h:t], self.us[t],
                          np.stack(self.feat_hist[t - self.h:t + 1]), self.m)

    def learn(self, t):
        if t < self.Tb:
            return
        ctx = self.context(t)
        for i, ln in enumerate(self.learners):
            window = np.stack(self.thetas[i][t - self.h:t + 1])
            g = local_peo_grad(ctx, i, window)
            ln.step_window(g, window)

    def theta_window(self, i, t):
        return np.stack(self.thetas[i][t - self.h:t + 1])


class GpcController:
    """Single-agent gradient controller over the full input.

    Same machinery with k = 1: the oracle regenerates the entire control window
    from the controller's own policy, and its gradient is taken at the current
    policy repeated across the window. It records the controls it commanded,
    having no way to sense that an actuator applied something else.
    """

    records_applied = False

    def __init__(self, system, cost, m, h, Tb=None, radius=10.0, schedule=None):
        self.system = system
        self.cost = cost
        self.m = int(m)
        self.h = int(h)
        self.Tb = int(Tb) if Tb is not None else self.m + self.h
        base = build_markov(system, h)
        self.markov = MarkovOperator(base.blocks, [system.d_u])
        self.learner = LearnerState(
            BallDomain(radius, (system.d_u, m * system.d_x)), step_schedule=schedule)
        self.thetas = []
        self.ws = []
        self.feat_hist = []
        self.us = []
        self.xnat_hist = [np.zeros(system.d_x)]
        self._x_prev = None

    @property
    def learners(self):
        return [self.learner]

    def observe(self, t, x):
        x = np.asarray(x, dtype=float)
        if t > 0:
            w = recover_disturbance(self.system, self._x_prev, self.us[t - 1], x)
            self.ws.append(w)
            self.xnat_hist.append(self.system.A @ self.xnat_hist[-1] + w)
        self._x_prev = x

    def act(self, t):
        feats = stack_window(self.ws[max(0, t - self.m):t], self.m, self.system.d_x)
        self.feat_hist.append(feats)
        theta = np.zeros(self.learner.domain.shape) if t < self.Tb \
            else self.learner.iterate.copy()
        self.thetas.append(theta)
        return theta @ feats

    def record(self, t, u):
        self.us.append(np.asarray(u, dtype=float).copy())

    def context(self, t):
        return PeoContext(self.markov, self.cost.at(t), self.xnat_hist[t],
                          self.us[t - self.h:t], self.us[t],
                          np.stack(self.feat_hist[t - self.h:t + 1]), self.m)

    def learn(self, t):
        if t < self.Tb:
            return
        ctx = self.context(t)
        repeated = np.stack([self.thetas[t]] * (self.h + 1))
        g = joint_peo_grad(ctx, [repeated])[0]
        self.learner.step_window(g, repeated)

    def theta_window(self, i, t):
        return np.stack(self.thetas[t - self.h:t + 1])


class FeedbackController:
    """Static baseline u = -Kx; learns nothing."""

    records_applied = True

    def __init__(self, K):
        self.K = K if isinstance(K, LinearFeedback) else LinearFeedback(K)
        self._x = None

    def observe(self, t, x):
        self._x = np.asarray(x, dtype=float)

    def act(self, t):
        return self.K.control(self._x)

    def record(self, t, u):
        pass

    def learn(self, t):
        pass


class ZeroController:
    """Plays the zero control forever."""

    records_applied = True

    def __init__(self, d_u):
        self.d_u = int(d_u)

    def observe(self, t, x):
        pass

    def act(self, t):
        return np.zeros(self.d_u)

    def record(self, t, u):
        pass

    def learn(self, t):
        pass
