"""Online convex optimization learners and the multiplayer linearization rounds.

Each of k learners owns a point in a Frobenius-ball domain. A round commits the
joint decision first, then reveals to learner i only the linearization of its
induced loss (the joint loss with all other agents' decisions frozen). With
memory, losses act on a window of the last h+1 joint decisions; the gradient a
learner receives covers its own window slice, the update step uses the sum of
the window blocks, and the regret ledger keeps window-level running sums so the
regret of the linear losses can be evaluated exactly against any fixed point
repeated across the window.
"""

import numpy as np


class BallDomain:
    """Frobenius-norm ball of a given radius around the origin."""

    def __init__(self, radius, shape):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.shape = tuple(shape) if not np.isscalar(shape) else (int(shape),)

    def zeros(self):
        return np.zeros(self.shape)

    def contains(self, x, tol=1e-12):
        return np.linalg.norm(np.asarray(x)) <= self.radius * (1.0 + tol)

    def project(self, x):
        """Nearest point in the ball; points already inside are returned unchanged."""
        x = np.asarray(x, dtype=float)
        nrm = np.linalg.norm(x)
        if nrm <= self.radius:
            return x
        return x * (self.radius / nrm)


class LearnerState:
    """Projected online gradient descent over a ball, with a regret ledger.

    step_schedule maps the 1-based round index to a step size. When omitted,
    the anytime default eta_t = D / (G sqrt(t)) is used with D = 2 * radius and
    G the running max of observed step-gradient norms.

    The ledger accumulates sum_t <g_t, x_t> and sum_t g_t over everything fed
    in, at window level when fed window gradients, which suffices to evaluate
    the linear-loss regret against any fixed comparator.
    """

    def __init__(self, domain, step_schedule=None, x0=None):
        self.domain = domain
        self.step_schedule = step_schedule
        self.iterate = domain.project(np.asarray(x0, dtype=float)) if x0 is not None \
            else domain.zeros()
        self.t = 0
        self._grad_max = 0.0
        self._ledger_inner = 0.0
        self._ledger_grad = domain.zeros()

    def _eta(self, step_norm):
        t = self.t + 1
        if self.step_schedule is not None:
            return self.step_schedule(t)
        self._grad_max = max(self._grad_max, step_norm)
        if self._grad_max == 0.0:
            return 0.0
        return 2.0 * self.domain.radius / (self._grad_max * np.sqrt(t))

    def step(self, g):
        """Feed the linear loss <g, .>: ledger it, then project a gradient step."""
        g = np.asarray(g, dtype=float)
        if g.shape != self.domain.shape:
            raise ValueError(f"gradient shape {g.shape} != domain shape {self.domain.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("gradient has non-finite entries")
        self._ledger_inner += float(np.vdot(g, self.iterate))
        self._ledger_grad = self._ledger_grad + g
        eta = self._eta(float(np.linalg.norm(g)))
        self.iterate = self.domain.project(self.iterate - eta * g)
        self.t += 1
        return self

    def step_window(self, g_window, x_window):
        """Feed a window gradient evaluated at the given window of own iterates.

        The ledger pairs each window block with the iterate it was evaluated at;
        the descent step uses the block sum, which is the gradient of the linear
        loss restricted to a single repeated decision.
        """
        g_window = np.asarray(g_window, dtype=float)
        x_window = np.asarray(x_window, dtype=float)
        if g_window.shape != x_window.shape or g_window.shape[1:] != self.domain.shape:
            raise ValueError("window shapes inconsistent with domain")
        if not np.all(np.isfinite(g_window)):
            raise ValueError("gradient has non-finite entries")
        self._ledger_inner += float(np.vdot(g_window, x_window))
        g_sum = g_window.sum(axis=0)
        self._ledger_grad = self._ledger_grad + g_sum
        eta = self._eta(float(np.linalg.norm(g_sum)))
        self.iterate = self.domain.project(self.iterate - eta * g_sum)
        self.t += 1
        return self

    def ledger_regret(self, comparator):
        """Total linear-loss regret of everything fed so far vs a fixed point."""
        comparator = np.asarray(comparator, dtype=float)
        return self._ledger_inner - float(np.vdot(self._ledger_grad, comparator))


def ogd_step(state, g):
    return state.step(g)


class JointDecision:
    """Per-agent decision points with a flat concatenation view."""

    def __init__(self, parts):
        self.parts = [np.asarray(p, dtype=float) for p in parts]

    @property
    def k(self):
        return len(self.parts)

    def concat(self):
        return np.concatenate([p.ravel() for p in self.parts])

    def __getitem__(self, i):
        return self.parts[i]


def multiplayer_oco_round(learners, joint_loss_grad_oracle):
    """One memoryless round: commit decisions, then feed per-agent linearizations.

    The oracle receives the committed JointDecision and must return, for each
    agent i, the gradient of the joint loss in agent i's block at that point.
    """
    decision = JointDecision([ln.iterate.copy() for ln in learners])
    grads = joint_loss_grad_oracle(decision)
    if len(grads) != len(learners):
        raise ValueError("oracle returned wrong number of gradients")
    for ln, g in zip(learners, grads):
        ln.step(g)
    return decision, learners


def multiplayer_ocom_round(learners, h, window, grad_oracle):
    """One round with memory h over a window of the last h+1 joint decisions.

    window[-1] must be the decision committed this round. The oracle receives,
    per agent, that agent's (h+1)-window of own decisions and returns the
    gradient of the agent's induced loss over the window. Each learner is fed
    the window gradient paired with its own slice.
    """
    if len(window) != h + 1:
        raise ValueError(f"window must hold h+1 = {h + 1} joint decisions")
    agent_windows = [np.stack([jd[i] for jd in window]) for i in range(len(learners))]
    grads = grad_oracle(agent_windows)
    if len(grads) != len(learners):
        raise ValueError("oracle returned wrong number of gradients")
    for ln, g, xw in zip(learners, grads, agent_windows):
        ln.step_window(g, xw)
    return window[-1], learners


def play_ocom(learners, h, grad_oracle_at, T):
    """Drive T rounds of the memory-h reduction, managing the decision window.

    grad_oracle_at(t, agent_windows) returns per-agent window gradients for
    round t (0-based). The window before the first round is padded with the
    initial joint decision. Returns the list of committed JointDecisions.
    """
    history = []
    pad = None
    for t in range(T):
        decision = JointDecision([ln.iterate.copy() for ln in learners])
        history.append(decision)
        if pad is None:
            pad = decision
        window = ([pad] * (h + 1 - len(history)) + history[-(h + 1):])[-(h + 1):]
        multiplayer_ocom_round(learners, h, window,
                               lambda aw: grad_oracle_at(t, aw))
    return history


def windows_from_history(history, h, t):
    """Window x_{t-h:t} from a decision history, left-padded with x_0."""
    pad = [history[0]] * max(0, h + 1 - (t + 1))
    return pad + history[max(0, t - h):t + 1]


def project_gradient_minimize(f, grad, domain, x0=None, iters=10000, tol=1e-8):
    """Projected gradient descent on a convex f over a ball domain.

    Step sizes follow a backtracking-free 1/L estimate refined by doubling when
    progress stalls. Returns (x, value, converged, residual).
    """
    x = domain.project(np.asarray(x0, dtype=float)) if x0 is not None else domain.zeros()
    g = grad(x)
    L = max(float(np.linalg.norm(g)) / max(domain.radius, 1e-12), 1e-12)
    step = 1.0 / L
    fx = f(x)
    converged = False
    residual = np.inf
    for _ in range(iters):
        x_new = domain.project(x - step * g)
        f_new = f(x_new)
        if f_new > fx + 1e-18:
            step *= 0.5
            if step < 1e-18:
                break
            continue
        residual = float(np.linalg.norm(x_new - x))
        x, fx = x_new, f_new
        g = grad(x)
        if residual <= tol * max(1.0, float(np.linalg.norm(x))):
            converged = True
            break
    return x, fx, converged, residual


def _grid_minimize(f, domain, levels=3, points=41):
    """Refining grid search for dimension <= 2, down to ~1e-3 of the radius."""
    d = int(np.prod(domain.shape))
    center = np.zeros(d)
    half = domain.radius
    best_x, best_f = None, np.inf
    for _ in range(levels):
        axes = [np.linspace(c - half, c + half, points) for c in center]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        for p in mesh:
            if np.linalg.norm(p) > domain.radius:
                continue
            v = f(p.reshape(domain.shape))
            if v < best_f:
                best_f, best_x = v, p
        center = best_x
        half = half * 2.0 / (points - 1)
    return best_x.reshape(domain.shape), best_f


class RegretReport:
    def __init__(self, regret, comparator, oracle_value, converged, residual):
        self.regret = regret
        self.comparator = comparator
        self.oracle_value = oracle_value
        self.converged = converged
        self.residual = residual


def best_fixed_decision(losses, domain, grad=None, fd_step=1e-6):
    """Best-in-hindsight oracle: minimize sum_t losses[t](x) over the domain.

    Independent of any learner: refining grid search for total dimension <= 2,
    projected gradient descent (1e4 iterations, tolerance 1e-8) otherwise, with
    a gradient-descent polish after the grid stage. Gradients fall back to
    central finite differences when not supplied.
    """
    def total(x):
        return sum(ell(x) for ell in losses)

    if grad is None:
        def grad(x):
            g = np.zeros_like(np.asarray(x, dtype=float))
            flat = g.ravel()
            xf = np.asarray(x, dtype=float).copy()
            for j in range(flat.size):
                orig = xf.ravel()[j]
                xf.ravel()[j] = orig + fd_step
                hi = total(xf)
                xf.ravel()[j] = orig - fd_step
                lo = total(xf)
                xf.ravel()[j] = orig
                flat[j] = (hi - lo) / (2.0 * fd_step)
            return g

    def total_grad(x):
        return grad(x)

    d = int(np.prod(domain.shape))
    if d <= 2:
        x0, _ = _grid_minimize(total, domain)
    else:
        x0 = domain.zeros()
    x, fx, converged, residual = project_gradient_minimize(total, total_grad, domain, x0=x0)
    return x, fx, converged, residual


def eval_multiagent_regret(losses, windows, domain, comparator_oracle=None, grad=None):
    """Average multi-agent regret of a played trajectory with memory.

    losses[t] maps a window (array of h+1 joint points) to a real; windows[t]
    is the window actually played at round t. The comparator repeats one fixed
    joint point across the window; its optimum comes from the supplied oracle
    or from the default best_fixed_decision.
    """
    T = len(losses)
    if T != len(windows):
        raise ValueError("losses and windows must have equal length")
    played = sum(losses[t](windows[t]) for t in range(T))
    h_plus_1 = len(windows[0])

    def bar(t):
        def f(x):
            return losses[t](np.stack([np.asarray(x, dtype=float)] * h_plus_1))
        return f

    bars = [bar(t) for t in range(T)]
    if comparator_oracle is not None:
        comp, value, converged, residual = comparator_oracle(bars, domain)
    else:
        comp, value, converged, residual = best_fixed_decision(bars, domain, grad=grad)
    return RegretReport(regret=(played - value) / T, comparator=comp,
                        oracle_value=value / T, converged=converged, residual=residual)
