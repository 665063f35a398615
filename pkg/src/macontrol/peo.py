"""Policy evaluation oracles built from truncated Markov operators.

The counterfactual cost of playing candidate policy matrices over the last h+1
steps is evaluated in closed form: the state is approximated as the zero-control
state plus the truncated control response, which is affine in each candidate
matrix, so composing with a convex cost keeps the oracle convex and its
gradient exact. A brute-force rollout of the defining recursion (restart from
the recorded state h steps back, replay regenerated controls) is provided as
the independent reference implementation.
"""

import numpy as np

from .policies import stack_window


class MarkovOperator:
    """Truncated response operator with blocks [B, AB, ..., A^{h-1}B].

    When an observation map C is supplied the blocks are [CB, CAB, ...]. Windows
    are ordered oldest-first: applying the operator to [u_{t-h}, ..., u_{t-1}]
    yields sum_r A^r B u_{t-1-r}, the truncated control contribution to x_t.
    """

    def __init__(self, blocks, input_dims):
        self.blocks = [np.asarray(b, dtype=float) for b in blocks]
        self.h = len(blocks)
        self.input_dims = list(input_dims)
        self.d_out = self.blocks[0].shape[0]
        self.d_u = self.blocks[0].shape[1]
        if sum(self.input_dims) != self.d_u:
            raise ValueError("input_dims do not sum to the operator's input width")
        # slot j of an oldest-first window multiplies A^{h-1-j} B
        self._flat = np.hstack(self.blocks[::-1])
        self._flat.setflags(write=False)
        self._slot_cache = {}

    def agent_slice(self, agent):
        start = sum(self.input_dims[:agent])
        return slice(start, start + self.input_dims[agent])

    def agent_view(self, agent):
        sl = self.agent_slice(agent)
        return MarkovOperator([b[:, sl] for b in self.blocks], [self.input_dims[agent]])

    def agent_slot_tensor(self, agent):
        """(h, d_out, d_{u_i}) array; entry j maps agent controls at window slot j."""
        if agent not in self._slot_cache:
            sl = self.agent_slice(agent)
            S = np.stack([self.blocks[self.h - 1 - j][:, sl] for j in range(self.h)])
            S.setflags(write=False)
            self._slot_cache[agent] = S
        return self._slot_cache[agent]

    def apply(self, window):
        """Truncated response to an oldest-first (h, d_u) control window."""
        window = np.asarray(window, dtype=float)
        if window.shape != (self.h, self.d_u):
            raise ValueError(f"window has shape {window.shape}, expected {(self.h, self.d_u)}")
        return self._flat @ window.ravel()


def build_markov(sys, h, observed=None):
    """Markov operator of horizon h for a system, optionally through a C map."""
    if h < 1:
        raise ValueError("horizon h must be >= 1")
    blocks = []
    P = sys.B
    for _ in range(h):
        blocks.append(P if observed is None else np.asarray(observed) @ P)
        P = sys.A @ P
    return MarkovOperator(blocks, sys.input_dims)


def default_horizon(cert, T):
    """Horizon giving ~1/T truncation error for a certified system."""
    rho = max(cert.spectral_radius, 1e-6)
    return max(1, int(np.ceil(np.log(max(T, 2)) / np.log(1.0 / rho))))


def recover_disturbance(sys, x_t, u_t, x_next):
    """Exact inversion of one fully observed transition: w = x' - Ax - Bu."""
    x_t = np.asarray(x_t, dtype=float)
    u_t = np.asarray(u_t, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    if x_t.shape != (sys.d_x,) or x_next.shape != (sys.d_x,) or u_t.shape != (sys.d_u,):
        raise ValueError("dimension mismatch in disturbance recovery")
    return x_next - sys.A @ x_t - sys.B @ u_t


def estimate_natures_y(sys, y_history, u_history, markov, agent=None):
    """Estimate the zero-control observation at the latest time in y_history.

    Subtracts the truncated contribution of the joint controls of all agents,
    y_t - Ghat [u_{t-h}, ..., u_{t-1}], using an operator built through the
    relevant observation map. When an agent index is given, the operator's
    output dimension is checked against that agent's observation map.
    Requires t > h so the control window is full.
    """
    if agent is not None and markov.d_out != sys.observation(agent).shape[0]:
        raise ValueError(f"operator output dim {markov.d_out} does not match "
                         f"agent {agent}'s observation dim")
    t = len(y_history) - 1
    if t <= markov.h:
        raise ValueError(f"need t > h = {markov.h}, got t = {t}")
    window = np.asarray(u_history[t - markov.h:t], dtype=float)
    return np.asarray(y_history[t], dtype=float) - markov.apply(window)


class PeoContext:
    """Frozen snapshot of everything an oracle needs at one time step.

    base         : zero-control state (or observation) at time t, from exactly
                   recovered disturbances.
    u_window     : recorded joint controls [u_{t-h}, ..., u_{t-1}], oldest-first.
    u_now        : recorded joint control u_t.
    feats        : policy input stacks for s = t-h..t, shape (h+1, m*d_feat);
                   row j feeds the candidate matrix for time t-h+j.
    """

    def __init__(self, markov, cost, base, u_window, u_now, feats, m):
        self.markov = markov
        self.cost = cost
        self.base = np.asarray(base, dtype=float)
        self.u_window = np.array(u_window, dtype=float)
        self.u_now = np.asarray(u_now, dtype=float)
        self.feats = np.array(feats, dtype=float)
        self.m = int(m)
        h = markov.h
        if self.u_window.shape != (h, markov.d_u):
            raise ValueError(f"u_window must be ({h}, {markov.d_u})")
        if self.feats.shape[0] != h + 1:
            raise ValueError(f"feats must have h+1 = {h + 1} rows")
        for a in (self.base, self.u_window, self.u_now, self.feats):
            a.setflags(write=False)

    @property
    def h(self):
        return self.markov.h


def dac_context(sys, cost, w_hist, u_hist, t, m, h, markov=None):
    """Build a full-observation context at time t from recorded histories.

    w_hist holds w_0..w_{>=t-1} (w_s drives the transition into x_{s+1});
    u_hist holds u_0..u_{>=t}. Requires t >= m + h (0-based; the burn-in of
    m + h steps has passed) so every window is fully observed.
    """
    if t < m + h:
        raise ValueError(f"need t >= m + h = {m + h}, got t = {t}")
    if markov is None:
        markov = build_markov(sys, h)
    w_hist = np.asarray(w_hist, dtype=float)
    u_hist = np.asarray(u_hist, dtype=float)
    xnat = np.zeros(sys.d_x)
    for s in range(t):
        xnat = sys.A @ xnat + w_hist[s]
    feats = np.stack([stack_window([w_hist[r] for r in range(max(0, s - m), s)], m, sys.d_x)
                      for s in range(t - h, t + 1)])
    return PeoContext(markov, cost, xnat, u_hist[t - h:t], u_hist[t], feats, m)


def _regenerate(theta_window, feats):
    """Controls produced by h+1 candidate matrices on the recorded input stacks."""
    tw = theta_window if isinstance(theta_window, np.ndarray) \
        else np.stack([np.asarray(th, dtype=float) for th in theta_window])
    if tw.shape[0] != feats.shape[0]:
        raise ValueError(f"theta window has {tw.shape[0]} entries, expected {feats.shape[0]}")
    return np.einsum("jab,jb->ja", tw, feats)


def _counterfactual_local(ctx, agent, theta_window):
    if len(theta_window) != ctx.h + 1:
        raise ValueError(f"theta_window must hold h+1 = {ctx.h + 1} matrices")
    ru = _regenerate(theta_window, ctx.feats)
    sl = ctx.markov.agent_slice(agent)
    window = ctx.u_window.copy()
    window[:, sl] = ru[:-1]
    u = ctx.u_now.copy()
    u[sl] = ru[-1]
    x = ctx.base + ctx.markov.apply(window)
    return x, u


def local_peo_eval(ctx, agent, theta_window):
    """Counterfactual cost had this agent played theta_window, others unchanged."""
    x, u = _counterfactual_local(ctx, agent, theta_window)
    return ctx.cost(x, u)


def local_peo_grad(ctx, agent, theta_window):
    """Exact gradient of local_peo_eval in each of the h+1 candidate matrices.

    The counterfactual state is affine in every candidate matrix, so the chain
    rule through the cost's gradients is exact. Costs without grad_x/grad_u fall
    back to central finite differences (step 1e-6).
    """
    if not (hasattr(ctx.cost, "grad_x") and hasattr(ctx.cost, "grad_u")):
        return _fd_grad(lambda tw: local_peo_eval(ctx, agent, tw), theta_window)
    x, u = _counterfactual_local(ctx, agent, theta_window)
    gx = ctx.cost.grad_x(x, u)
    gu = ctx.cost.grad_u(x, u)
    S = ctx.markov.agent_slot_tensor(agent)          # (h, d_out, d_ui)
    lever = np.einsum("jda,d->ja", S, gx)            # (h, d_ui)
    grads = np.einsum("ja,jb->jab", lever, ctx.feats[:-1])
    g_now = np.outer(gu[ctx.markov.agent_slice(agent)], ctx.feats[-1])
    return np.concatenate([grads, g_now[None]], axis=0)


def joint_peo_eval(ctx, theta_windows):
    """Counterfactual cost had every agent played its candidate window."""
    k = len(ctx.markov.input_dims)
    if len(theta_windows) != k:
        raise ValueError(f"need one theta window per agent, got {len(theta_windows)}")
    window = np.empty_like(ctx.u_window)
    u = np.empty_like(ctx.u_now)
    for i in range(k):
        ru = _regenerate(theta_windows[i], ctx.feats)
        sl = ctx.markov.agent_slice(i)
        window[:, sl] = ru[:-1]
        u[sl] = ru[-1]
    x = ctx.base + ctx.markov.apply(window)
    return ctx.cost(x, u)


def joint_peo_grad(ctx, theta_windows):
    """Per-agent exact gradients of joint_peo_eval; list of (h+1, ...) arrays."""
    k = len(ctx.markov.input_dims)
    window = np.empty_like(ctx.u_window)
    u = np.empty_like(ctx.u_now)
    for i in range(k):
        ru = _regenerate(theta_windows[i], ctx.feats)
        sl = ctx.markov.agent_slice(i)
        window[:, sl] = ru[:-1]
        u[sl] = ru[-1]
    x = ctx.base + ctx.markov.apply(window)
    gx = ctx.cost.grad_x(x, u)
    gu = ctx.cost.grad_u(x, u)
    out = []
    for i in range(k):
        S = ctx.markov.agent_slot_tensor(i)
        lever = np.einsum("jda,d->ja", S, gx)
        grads = np.einsum("ja,jb->jab", lever, ctx.feats[:-1])
        g_now = np.outer(gu[ctx.markov.agent_slice(i)], ctx.feats[-1])
        out.append(np.concatenate([grads, g_now[None]], axis=0))
    return out


def _fd_grad(f, theta_window, step=1e-6):
    theta_window = [np.asarray(th, dtype=float).copy() for th in theta_window]
    grads = []
    for j, th in enumerate(theta_window):
        g = np.zeros_like(th)
        it = np.nditer(th, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = th[idx]
            th[idx] = orig + step
            hi = f(theta_window)
            th[idx] = orig - step
            lo = f(theta_window)
            th[idx] = orig
            g[idx] = (hi - lo) / (2.0 * step)
            it.iternext()
        grads.append(g)
    return np.stack(grads)


def rollout_peo_eval(sys, cost, x_hist, u_hist, w_hist, agent, theta_window, m, h, t):
    """Reference oracle: restart from the recorded state h steps back and replay.

    The recursion starts at the true x_{t-h}, regenerates this agent's controls
    from theta_window on true disturbance windows for s = t-h..t while keeping
    all other recorded controls fixed, and rolls the exact dynamics forward.
    Differs from local_peo_eval only by the control contribution older than h.
    """
    if len(theta_window) != h + 1:
        raise ValueError(f"theta_window must hold h+1 = {h + 1} matrices")
    x = np.asarray(x_hist[t - h], dtype=float).copy()
    sl = slice(sum(sys.input_dims[:agent]), sum(sys.input_dims[:agent + 1]))
    u = None
    for j, s in enumerate(range(t - h, t + 1)):
        feats = stack_window([w_hist[r] for r in range(max(0, s - m), s)], m, sys.d_x)
        u = np.asarray(u_hist[s], dtype=float).copy()
        u[sl] = np.asarray(theta_window[j], dtype=float) @ feats
        if s < t:
            x = sys.A @ x + sys.B @ u + np.asarray(w_hist[s], dtype=float)
    return cost(x, u)


def rollout_joint_peo_eval(sys, cost, x_hist, u_hist, w_hist, theta_windows, m, h, t):
    """Joint variant of the reference oracle: every agent's window regenerated."""
    x = np.asarray(x_hist[t - h], dtype=float).copy()
    u = None
    for j, s in enumerate(range(t - h, t + 1)):
        feats = stack_window([w_hist[r] for r in range(max(0, s - m), s)], m, sys.d_x)
        parts = [np.asarray(theta_windows[i][j], dtype=float) @ feats
                 for i in range(len(theta_windows))]
        u = np.concatenate(parts)
        if s < t:
            x = sys.A @ x + sys.B @ u + np.asarray(w_hist[s], dtype=float)
    return cost(x, u)
