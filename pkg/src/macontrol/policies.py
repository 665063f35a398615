"""Policy classes whose controls are functions of disturbances alone.

Disturbance-action and disturbance-response policies read a fixed-length window
of past process disturbances (resp. zero-control observations), so one agent's
control sequence never depends on what other agents play. Linear state feedback
and the linear-dynamic-controller reference class are included as baselines and
comparators; state feedback deliberately violates the decoupling property.
"""

import numpy as np

from .lds import step_dynamics


def stack_window(vectors, m, dim):
    """Stack the last m vectors oldest-first into a flat (m*dim,) array.

    Shorter histories are zero-padded on the old side; windows at the start of
    a run therefore read as if all pre-run disturbances were zero.
    """
    if len(vectors) > m:
        vectors = vectors[-m:]
    out = np.zeros(m * dim)
    offset = m - len(vectors)
    for j, v in enumerate(vectors):
        v = np.asarray(v, dtype=float)
        if v.shape != (dim,):
            raise ValueError(f"window entry has shape {v.shape}, expected ({dim},)")
        out[(offset + j) * dim:(offset + j + 1) * dim] = v
    return out


class DacPolicy:
    """Disturbance-action control: u_t = M [w_{t-m}; ...; w_{t-1}]."""

    def __init__(self, M, m):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2:
            raise ValueError("M must be a matrix")
        if M.shape[1] % m != 0:
            raise ValueError(f"M has {M.shape[1]} columns, not a multiple of m={m}")
        self.M = M
        self.m = int(m)
        self.d_in = M.shape[1] // m
        self.M.setflags(write=False)

    def control(self, w_window):
        return self.M @ stack_window(w_window, self.m, self.d_in)


class DrcPolicy:
    """Disturbance-response control: u_t = M [y^nat_{t-m}; ...; y^nat_{t-1}]."""

    def __init__(self, M, m):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2:
            raise ValueError("M must be a matrix")
        if M.shape[1] % m != 0:
            raise ValueError(f"M has {M.shape[1]} columns, not a multiple of m={m}")
        self.M = M
        self.m = int(m)
        self.d_in = M.shape[1] // m
        self.M.setflags(write=False)

    def control(self, ynat_window):
        return self.M @ stack_window(ynat_window, self.m, self.d_in)


class LinearFeedback:
    """Static state feedback u_t = -K x_t."""

    def __init__(self, K):
        K = np.asarray(K, dtype=float)
        if K.ndim != 2:
            raise ValueError("K must be a matrix")
        self.K = K
        self.K.setflags(write=False)

    def control(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.K.shape[1],):
            raise ValueError(f"state has shape {x.shape}, expected ({self.K.shape[1]},)")
        return -self.K @ x


class OpenLoopPolicy:
    """Fixed control schedule, independent of all observations."""

    def __init__(self, u_schedule):
        self.u_schedule = [np.asarray(u, dtype=float) for u in u_schedule]

    def control(self, t):
        return self.u_schedule[t]


class LdcPolicy:
    """Linear dynamic controller: s_{t+1} = A s_t + B x_t, u_t = C s_t + D x_t.

    Reference class only; not trained. Kept for simulation checks against its
    defining recursion.
    """

    def __init__(self, A_pi, B_pi, C_pi, D_pi):
        self.A_pi = np.asarray(A_pi, dtype=float)
        self.B_pi = np.asarray(B_pi, dtype=float)
        self.C_pi = np.asarray(C_pi, dtype=float)
        self.D_pi = np.asarray(D_pi, dtype=float)
        self.s = np.zeros(self.A_pi.shape[0])

    def reset(self):
        self.s = np.zeros(self.A_pi.shape[0])

    def control(self, x):
        x = np.asarray(x, dtype=float)
        u = self.C_pi @ self.s + self.D_pi @ x
        self.s = self.A_pi @ self.s + self.B_pi @ x
        return u


def dac_control(policy, w_window):
    return policy.control(w_window)


def drc_control(policy, ynat_window):
    return policy.control(ynat_window)


def feedback_control(policy, x):
    return policy.control(x)


def _simulate_joint(sys, agent_policies, w, m, e_traces=None):
    """Closed-loop run where each agent's policy reads its own inputs.

    DacPolicy agents read true disturbance windows, DrcPolicy agents windows of
    their own zero-control observations (precomputed from w and e, which do not
    depend on anyone's controls), LinearFeedback agents the current state, and
    OpenLoopPolicy agents the clock. Returns per-agent control sequences, each
    of shape (T, d_{u_i}).
    """
    T = w.shape[0]
    ynat = {}
    for i, pol in enumerate(agent_policies):
        if isinstance(pol, DrcPolicy):
            from .lds import natures_y
            e = e_traces[i] if e_traces is not None else None
            ynat[i] = natures_y(sys, w, e, i)
    x = np.zeros(sys.d_x)
    controls = [np.zeros((T, d)) for d in sys.input_dims]
    for t in range(T):
        parts = []
        for i, pol in enumerate(agent_policies):
            if isinstance(pol, DacPolicy):
                ui = pol.control([w[s] for s in range(max(0, t - m), t)])
            elif isinstance(pol, DrcPolicy):
                ui = pol.control([ynat[i][s] for s in range(max(0, t - m), t)])
            elif isinstance(pol, LinearFeedback):
                ui = pol.control(x)
            elif isinstance(pol, OpenLoopPolicy):
                ui = pol.control(t)
            else:
                raise TypeError(f"unsupported policy type {type(pol).__name__}")
            controls[i][t] = ui
            parts.append(ui)
        x = step_dynamics(sys, x, np.concatenate(parts), w[t])
    return controls


def decoupling_check(agent_policies, varied_agent, alt_policy, sys, w_trace,
                     m=None, e_traces=None):
    """True iff varying one agent's policy leaves all other controls bit-identical.

    Runs the same disturbance trace twice, once with agent_policies as given and
    once with varied_agent's policy replaced by alt_policy, and compares every
    other agent's control sequence exactly. Disturbance-window policies pass;
    raw state feedback fails because the state carries other agents' controls.
    """
    w = w_trace.w if hasattr(w_trace, "w") else np.asarray(w_trace, dtype=float)
    if m is None:
        ms = [p.m for p in agent_policies if isinstance(p, (DacPolicy, DrcPolicy))]
        m = ms[0] if ms else 1
    base = _simulate_joint(sys, agent_policies, w, m, e_traces)
    varied = list(agent_policies)
    varied[varied_agent] = alt_policy
    other = _simulate_joint(sys, varied, w, m, e_traces)
    return all(np.array_equal(base[i], other[i])
               for i in range(len(agent_policies)) if i != varied_agent)


MATRIX_FORMAT_HEADER = "macontrol-matrix v1"


def save_policy_matrix(path, M, kind="dac", m=None):
    """Write a policy matrix as flat text: header with dims, then row-major rows."""
    M = np.asarray(M, dtype=float)
    lines = [MATRIX_FORMAT_HEADER,
             f"kind: {kind}",
             f"rows: {M.shape[0]}",
             f"cols: {M.shape[1]}",
             f"m: {m if m is not None else 0}"]
    for row in M:
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_policy_matrix(path):
    """Read a matrix written by save_policy_matrix; returns (M, kind, m)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MATRIX_FORMAT_HEADER:
        raise ValueError("not a macontrol matrix file")
    meta = {}
    for ln in lines[1:5]:
        key, _, val = ln.partition(":")
        meta[key.strip()] = val.strip()
    rows, cols = int(meta["rows"]), int(meta["cols"])
    data = [[float(v) for v in ln.split()] for ln in lines[5:5 + rows]]
    M = np.array(data, dtype=float)
    if M.shape != (rows, cols):
        raise ValueError(f"matrix body has shape {M.shape}, header says {(rows, cols)}")
    m = int(meta["m"]) or None
    return M, meta["kind"], m
