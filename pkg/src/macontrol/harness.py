"""Experiment orchestration: scenario presets, failure injection, regret
accounting, and result persistence.

Scenarios are fully determined by a flat configuration: equal configs produce
byte-identical logs. The overactuated-aircraft preset is open-loop unstable and
is therefore run behind a shared LQR baseline for the learned controllers,
while the linear baselines act on the raw plant; the reported cost always
charges the total applied control.
"""

import hashlib
import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .controllers import (FeedbackController, GpcController, MagpcController,
                          StabilizedPlant, ZeroController, hinf_synthesize,
                          lqr_synthesize, quad_joint_form)
from .lds import (PROFILES, LinearSystem, QuadCost, generate_disturbances,
                  natures_x)
from .oco import BallDomain, LearnerState, best_fixed_decision, \
    multiplayer_oco_round
from .peo import joint_peo_eval
from .policies import stack_window


class ConfigError(ValueError):
    """Invalid or unknown experiment configuration."""


SCENARIOS = ("admire", "stable-pair")
CONTROLLERS = ("magpc", "gpc", "lqr", "hinf", "zero")

_ADMIRE_A = [
    [1.5109, 0.0084, 0.0009, 0.8598, -0.0043],
    [0.0, -0.0295, 0.0903, 0.0, -0.4500],
    [0.0, -3.1070, -0.1427, 0.0, 2.7006],
    [2.3057, 0.0097, 0.0006, 1.5439, -0.0029],
    [0.0, 0.5000, 0.0125, 0.0, 0.4878],
]
_ADMIRE_B = [
    [0.6981, -0.5388, -0.5367, 0.0029],
    [0.0, -0.2031, 0.2031, 0.3912],
    [0.0, -2.0768, 2.0768, -0.4667],
    [1.8415, -1.4190, -1.4190, 0.0035],
    [0.0, -0.1854, 0.1854, -0.7047],
]


def admire_system():
    """Overactuated aircraft model: 5 states, four 1-d control agents."""
    B = np.array(_ADMIRE_B)
    return LinearSystem(np.array(_ADMIRE_A), [B[:, i:i + 1] for i in range(4)])


def stable_pair_system():
    """Small strongly stable plant with two 1-d control agents."""
    A = np.array([[0.8, 0.1], [0.0, 0.7]])
    return LinearSystem(A, [np.array([[1.0], [0.0]]), np.array([[0.3], [1.0]])])


@dataclass
class ExperimentConfig:
    scenario: str = ""
    T: int = 2000
    seed: int = 0
    profile: str = "gaussian"
    controller: str = "magpc"
    lr_num: float = 0.001
    h: int = 5
    m: int = 5
    Tb: int = 0            # 0 means the default m + h
    failure_agent: int = 0  # 1-based; 0 means no failure
    failure_t: int = 500    # 1-based first failed step
    Q_scale: float = 1.0
    R_scale: float = 1.0
    radius: float = 10.0

    def effective_Tb(self):
        return self.Tb if self.Tb > 0 else self.m + self.h

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.T < 1:
            raise ConfigError(f"T must be >= 1, got {self.T}")
        if not 1 <= self.h <= 1000:
            raise ConfigError(f"h out of range [1, 1000]: {self.h}")
        if not 1 <= self.m <= 1000:
            raise ConfigError(f"m out of range [1, 1000]: {self.m}")
        if self.Tb and self.Tb < self.m + self.h:
            raise ConfigError(f"Tb must be >= m + h = {self.m + self.h}, got {self.Tb}")
        if self.profile not in PROFILES or self.profile == "custom":
            raise ConfigError(f"profile must be one of {PROFILES[:-1]}, got {self.profile!r}")
        if self.controller not in CONTROLLERS:
            raise ConfigError(f"controller must be one of {CONTROLLERS}, got {self.controller!r}")
        if self.lr_num < 0:
            raise ConfigError(f"lr_num must be >= 0, got {self.lr_num}")
        if self.failure_agent < 0:
            raise ConfigError(f"failure_agent must be >= 0, got {self.failure_agent}")
        if self.failure_t < 1:
            raise ConfigError(f"failure_t must be >= 1, got {self.failure_t}")
        if self.Q_scale <= 0 or self.R_scale <= 0:
            raise ConfigError("Q_scale and R_scale must be positive")
        if self.radius <= 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        return self


_INT_KEYS = {"T", "seed", "h", "m", "Tb", "failure_agent", "failure_t"}
_FLOAT_KEYS = {"lr_num", "Q_scale", "R_scale", "radius"}
_STR_KEYS = {"scenario", "profile", "controller"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def parse_config(text, scenario=None, overrides=None):
    """Parse flat `key = value` text into a validated ExperimentConfig.

    Blank lines and lines starting with '#' are skipped. Unknown keys and
    malformed values are rejected. A scenario given by the caller fills in a
    missing scenario key; overrides (a key -> string mapping) are applied last.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        values[key.strip()] = val.strip()
    if overrides:
        values.update({k: str(v) for k, v in overrides.items()})
    if scenario is not None and "scenario" not in values:
        values["scenario"] = scenario
    if "scenario" not in values:
        raise ConfigError("missing scenario")
    cfg = ExperimentConfig()
    for key, val in values.items():
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _INT_KEYS:
                parsed = int(val)
            elif key in _FLOAT_KEYS:
                parsed = float(val)
            else:
                parsed = val
        except ValueError:
            raise ConfigError(f"malformed value for {key!r}: {val!r}") from None
        cfg = replace(cfg, **{key: parsed})
    return cfg.validate()


def serialize_config(cfg):
    """Canonical flat text form; parse(serialize(cfg)) equals cfg."""
    lines = []
    for f in fields(cfg):
        lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    return "\n".join(lines) + "\n"


def config_hash(cfg):
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


class ExperimentLog:
    """Per-step records plus a summary; row count equals the horizon."""

    def __init__(self, costs, state_norms, agent_norms, failed, summary):
        self.costs = np.asarray(costs, dtype=float)
        self.state_norms = np.asarray(state_norms, dtype=float)
        self.agent_norms = np.asarray(agent_norms, dtype=float)
        self.failed = np.asarray(failed, dtype=int)
        self.avg_costs = np.cumsum(self.costs) / np.arange(1, len(self.costs) + 1)
        self.summary = dict(summary)

    @property
    def T(self):
        return len(self.costs)

    def write_csv(self, path):
        k = self.agent_norms.shape[1]
        header = "t,cost,avg_cost,state_norm," + ",".join(f"u{i+1}" for i in range(k)) + ",failed"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for t in range(self.T):
                row = [str(t + 1), repr(float(self.costs[t])),
                       repr(float(self.avg_costs[t])),
                       repr(float(self.state_norms[t]))]
                row += [repr(float(self.agent_norms[t, i])) for i in range(k)]
                row.append(str(self.failed[t]))
                fh.write(",".join(row) + "\n")

    def write_summary(self, path):
        with open(path, "w") as fh:
            for key in sorted(self.summary):
                fh.write(f"{key} = {self.summary[key]}\n")


class RunResult:
    """Everything a run produced, for metrics and regret accounting."""

    def __init__(self, cfg, system_eff, cost_eff, raw_sys, baseline_K, controller,
                 trace, xs, us_applied, costs, log):
        self.cfg = cfg
        self.system_eff = system_eff
        self.cost_eff = cost_eff
        self.raw_sys = raw_sys
        self.baseline_K = baseline_K
        self.controller = controller
        self.trace = trace
        self.xs = xs
        self.us_applied = us_applied
        self.costs = costs
        self.log = log

    @property
    def w(self):
        return self.trace.w


def simulate(system_eff, cost_eff, controller, trace, input_dims,
             failure_agent=0, failure_start0=None):
    """Drive one controller for the length of the trace; returns run arrays.

    failure_agent is 1-based over input_dims; from step failure_start0 (0-based)
    onward that agent's slice of the applied control is zeroed after the
    controller commits. Controllers that cannot sense actuation record their
    commanded control; the rest record what was applied.
    """
    w = trace.w
    T = w.shape[0]
    d_u = sum(input_dims)
    x = np.zeros(system_eff.d_x)
    xs = np.zeros((T + 1, system_eff.d_x))
    us = np.zeros((T, d_u))
    costs = np.zeros(T)
    failed_col = np.zeros(T, dtype=int)
    fail_slice = None
    if failure_agent and failure_start0 is not None:
        start = sum(input_dims[:failure_agent - 1])
        fail_slice = slice(start, start + input_dims[failure_agent - 1])
    for t in range(T):
        controller.observe(t, x)
        u_cmd = controller.act(t)
        u_app = u_cmd
        if fail_slice is not None and t >= failure_start0:
            u_app = u_cmd.copy()
            u_app[fail_slice] = 0.0
            failed_col[t] = 1
        controller.record(t, u_app if controller.records_applied else u_cmd)
        costs[t] = cost_eff(x, u_app)
        controller.learn(t)
        xs[t] = x
        us[t] = u_app
        x = system_eff.A @ x + system_eff.B @ u_app + w[t]
    xs[T] = x
    return xs, us, costs, failed_col


def _build_scenario(cfg):
    if cfg.scenario == "admire":
        sys = admire_system()
    else:
        sys = stable_pair_system()
    Q = cfg.Q_scale * np.eye(sys.d_x)
    R = cfg.R_scale * np.eye(sys.d_u)
    cost = QuadCost(Q, R)
    return sys, cost


def _lr_schedule(lr_num):
    if lr_num == 0:
        return lambda t: 0.0
    return lambda t: lr_num / t


def run_experiment(cfg):
    """Run one configured scenario start to finish; returns a RunResult."""
    cfg.validate()
    sys, cost = _build_scenario(cfg)
    trace = generate_disturbances(cfg.profile, cfg.seed, cfg.T, sys.d_x)
    needs_wrap = cfg.controller in ("magpc", "gpc") and cfg.scenario == "admire"
    baseline_K = None
    if cfg.controller in ("magpc", "gpc"):
        if needs_wrap:
            K = lqr_synthesize(sys, cost.Q, cost.R)
            plant = StabilizedPlant(sys, K)
            system_eff, cost_eff, baseline_K = plant.closed, plant.wrap_cost(cost), K.K
        else:
            system_eff, cost_eff = sys, cost
        ctor = MagpcController if cfg.controller == "magpc" else GpcController
        controller = ctor(system_eff, cost_eff, cfg.m, cfg.h, Tb=cfg.effective_Tb(),
                          radius=cfg.radius, schedule=_lr_schedule(cfg.lr_num))
    elif cfg.controller == "lqr":
        system_eff, cost_eff = sys, cost
        K = lqr_synthesize(sys, cost.Q, cost.R)
        baseline_K = K.K
        controller = FeedbackController(K)
    elif cfg.controller == "hinf":
        system_eff, cost_eff = sys, cost
        K, _ = hinf_synthesize(sys, cost.Q, cost.R)
        baseline_K = K.K
        controller = FeedbackController(K)
    else:
        system_eff, cost_eff = sys, cost
        controller = ZeroController(sys.d_u)
    failure_start0 = cfg.failure_t - 1 if cfg.failure_agent else None
    if cfg.failure_agent > sys.k:
        raise ConfigError(f"failure_agent {cfg.failure_agent} exceeds k = {sys.k}")
    xs, us, costs, failed_col = simulate(system_eff, cost_eff, controller, trace,
                                         sys.input_dims, cfg.failure_agent, failure_start0)
    agent_norms = np.stack([np.linalg.norm(us[:, sys.input_slice(i)], axis=1)
                            for i in range(sys.k)], axis=1)
    state_norms = np.linalg.norm(xs[:-1], axis=1)
    summary = {
        "scenario": cfg.scenario, "controller": cfg.controller, "T": cfg.T,
        "seed": cfg.seed, "profile": cfg.profile, "config_hash": config_hash(cfg),
        "total_cost": repr(float(np.sum(costs))),
        "avg_cost": repr(float(np.mean(costs))),
        "max_state_norm": repr(float(np.max(np.linalg.norm(xs, axis=1)))),
    }
    if cfg.failure_agent:
        pre = state_norms[:failure_start0] if failure_start0 else state_norms[:1]
        summary["pre_failure_max_state_norm"] = repr(float(np.max(pre)))
    log = ExperimentLog(costs, state_norms, agent_norms, failed_col, summary)
    return RunResult(cfg, system_eff, cost_eff, sys, baseline_K, controller,
                     trace, xs, us, costs, log)


def simulate_fixed_dac(system, cost, w, M, m):
    """Exact trajectory under one fixed joint disturbance-action matrix."""
    T = w.shape[0]
    x = np.zeros(system.d_x)
    xs = np.zeros((T + 1, system.d_x))
    us = np.zeros((T, system.d_u))
    costs = np.zeros(T)
    for t in range(T):
        feats = stack_window(w[max(0, t - m):t], m, system.d_x)
        u = M @ feats
        xs[t] = x
        us[t] = u
        costs[t] = cost(x, u)
        x = system.A @ x + system.B @ u + w[t]
    xs[T] = x
    return xs, us, costs


def offline_best_dac(system, cost, w, m, radius, iters=10_000, tol=1e-8):
    """Best fixed joint disturbance-action matrix in hindsight.

    The exact counterfactual total cost is quadratic in the matrix entries, so
    its coefficients are assembled once from basis responses, and projected
    gradient descent (per-agent Frobenius-ball projection) minimizes it.
    Returns (M, total_cost, converged, residual).
    """
    T = w.shape[0]
    d_x, d_u = system.d_x, system.d_u
    mdx = m * d_x
    P = d_u * mdx
    W = np.zeros((T, mdx))
    for t in range(T):
        W[t] = stack_window(w[max(0, t - m):t], m, d_x)
    S = quad_joint_form(cost, d_x, d_u)
    xnat = natures_x(system, w)
    H = np.zeros((P, P))
    b = np.zeros(P)
    X = np.zeros((d_x, P))
    for t in range(T):
        U = np.zeros((d_u, P))
        for a in range(d_u):
            U[a, a * mdx:(a + 1) * mdx] = W[t]
        Z = np.vstack([X, U])
        z0 = np.concatenate([xnat[t], np.zeros(d_u)])
        SZ = S @ Z
        H += Z.T @ SZ
        b += SZ.T @ z0
        X = system.A @ X + system.B @ U
    H = 0.5 * (H + H.T)
    base_cost = float(sum(cost(xnat[t], np.zeros(d_u)) for t in range(T)))

    dims = system.input_dims
    row_of = np.concatenate([[i] * d for i, d in enumerate(dims)])

    def project(mvec):
        M = mvec.reshape(d_u, mdx)
        out = M.copy()
        for i in range(len(dims)):
            rows = row_of == i
            nrm = np.linalg.norm(M[rows])
            if nrm > radius:
                out[rows] = M[rows] * (radius / nrm)
        return out.ravel()

    L = max(float(np.linalg.eigvalsh(H)[-1]), 1e-12)
    step = 0.5 / L
    mvec = np.zeros(P)
    converged = False
    residual = np.inf
    for _ in range(iters):
        g = 2.0 * (H @ mvec + b)
        m_new = project(mvec - step * g)
        residual = float(np.linalg.norm(m_new - mvec))
        mvec = m_new
        if residual <= tol * max(1.0, float(np.linalg.norm(mvec))):
            converged = True
            break
    total = float(mvec @ H @ mvec + 2.0 * b @ mvec + base_cost)
    return mvec.reshape(d_u, mdx), total, converged, residual


@dataclass
class RegretDecomposition:
    burn_in: float
    alg_truncation: float
    policy_regret: float
    comp_truncation: float
    total_regret: float
    comparator_avg_cost: float
    measured_eps: float
    ledger_sum: float
    nat_radius: float
    cost_constant: float
    Tb: int
    T: int
    oracle_converged: bool
    oracle_residual: float

    def terms_sum(self):
        return self.burn_in + self.alg_truncation + self.policy_regret + self.comp_truncation

    def regret_bound(self):
        """Ledger + burn-in + oracle error terms that dominate the regret."""
        return (self.ledger_sum + self.Tb * self.cost_constant * self.nat_radius**2 / self.T
                + 2.0 * self.measured_eps)

    def as_dict(self):
        return {
            "burn_in_term": self.burn_in,
            "alg_truncation_term": self.alg_truncation,
            "policy_regret_term": self.policy_regret,
            "comp_truncation_term": self.comp_truncation,
            "terms_sum": self.terms_sum(),
            "total_regret": self.total_regret,
            "comparator_avg_cost": self.comparator_avg_cost,
            "measured_eps": self.measured_eps,
            "ledger_sum": self.ledger_sum,
            "regret_bound": self.regret_bound(),
            "oracle_converged": self.oracle_converged,
            "oracle_residual": self.oracle_residual,
        }


def measure_regret_terms(run, oracle=None):
    """Four-term regret decomposition of a learned-controller run.

    burn-in + algorithm truncation + policy regret + comparator truncation add
    up to the measured regret exactly; each term is computed from the run's
    recorded histories and an offline comparator (best fixed joint
    disturbance-action matrix on the same disturbances).
    """
    ctrl = run.controller
    if not isinstance(ctrl, (MagpcController, GpcController)):
        raise ValueError("regret decomposition needs a learned controller run")
    cfg = run.cfg
    T = run.w.shape[0]
    Tb = ctrl.Tb
    if oracle is None:
        M_star, total_star, converged, resid = offline_best_dac(
            run.system_eff, run.cost_eff, run.w, ctrl.m, cfg.radius)
    else:
        M_star, total_star, converged, resid = oracle(run)
    xs_star, us_star, costs_star = simulate_fixed_dac(
        run.system_eff, run.cost_eff, run.w, M_star, ctrl.m)

    if isinstance(ctrl, MagpcController):
        dims = run.system_eff.input_dims
        offs = np.cumsum([0] + dims)
        star_blocks = [M_star[offs[i]:offs[i + 1]] for i in range(len(dims))]
        n_agents = len(dims)
    else:
        star_blocks = [M_star]
        n_agents = 1

    burn = float(np.sum(run.costs[:Tb]) - np.sum(costs_star[:Tb])) / T
    alg_gap = 0.0
    pol_gap = 0.0
    comp_gap = 0.0
    eps = 0.0
    h = ctrl.h
    for t in range(Tb, T):
        ctx = ctrl.context(t)
        played = [ctrl.theta_window(i, t) for i in range(n_agents)]
        ell = joint_peo_eval(ctx, played)
        ell_star = joint_peo_eval(ctx, [np.stack([blk] * (h + 1)) for blk in star_blocks])
        alg_gap += run.costs[t] - ell
        pol_gap += ell - ell_star
        comp_gap += ell_star - costs_star[t]
        eps = max(eps, abs(run.costs[t] - ell), abs(ell_star - costs_star[t]))
    ledger = sum(ctrl.learners[i].ledger_regret(star_blocks[i]) for i in range(n_agents)) / T
    xnat = natures_x(run.system_eff, run.w)
    total_regret = float(np.sum(run.costs) - np.sum(costs_star)) / T
    return RegretDecomposition(
        burn_in=burn, alg_truncation=alg_gap / T, policy_regret=pol_gap / T,
        comp_truncation=comp_gap / T, total_regret=total_regret,
        comparator_avg_cost=float(np.sum(costs_star)) / T, measured_eps=eps,
        ledger_sum=ledger, nat_radius=float(np.max(np.linalg.norm(xnat, axis=1))),
        cost_constant=run.cost_eff.bound_constant(), Tb=Tb, T=T,
        oracle_converged=converged, oracle_residual=resid)


@dataclass
class OcoDemoReport:
    T: int
    scripted_joint_losses: np.ndarray
    scripted_player_best: float
    scripted_player_regret: float
    scripted_regret_per_round: float
    ogd_joint_losses: np.ndarray
    ogd_avg_regret: float

    def rows(self):
        for t in range(self.T):
            yield t + 1, self.scripted_joint_losses[t], self.ogd_joint_losses[t]


def _alternating_game_loss(x1, x2):
    return (x1 - x2) ** 2 + 0.1 * (x1 ** 2 + x2 ** 2)


def demo_oco_counterexample(T, eta=None, radius=2.0, start=(1.0, -1.0)):
    """Two-player quadratic game where naive per-player learning fails.

    Scripted learners that mirror each other keep the joint loss constant while
    each enjoys negative individual regret; the linearized reduction with
    projected OGD drives the joint loss toward the joint optimum instead.
    """
    if T < 2 or T % 2:
        raise ValueError("T must be even and >= 2")
    ts = np.arange(1, T + 1)
    plays = np.where(ts % 2 == 1, 1.0, -1.0)
    scripted_losses = np.array([_alternating_game_loss(p, p) for p in plays])
    # each player's observed loss at z vs. the other's alternating plays
    opp = plays
    a = 1.0 + 0.1
    b = -2.0 * float(np.mean(opp))
    z_best = np.clip(-b / (2 * a), -radius, radius)
    best_avg = float(np.mean((z_best - opp) ** 2 + 0.1 * z_best ** 2 + 0.1 * opp ** 2))
    played_avg = float(np.mean((plays - opp) ** 2 + 0.1 * plays ** 2 + 0.1 * opp ** 2))

    if eta is None:
        eta = lambda t: 1.0 / np.sqrt(t)
    learners = [LearnerState(BallDomain(radius, (1,)), step_schedule=eta,
                             x0=np.array([s])) for s in start]

    def grad_oracle(joint):
        x1, x2 = joint[0][0], joint[1][0]
        return [np.array([2.0 * (x1 - x2) + 0.2 * x1]),
                np.array([2.0 * (x2 - x1) + 0.2 * x2])]

    ogd_losses = np.zeros(T)
    for t in range(T):
        decision, _ = multiplayer_oco_round(learners, grad_oracle)
        ogd_losses[t] = _alternating_game_loss(decision[0][0], decision[1][0])

    def joint_loss(z):
        return _alternating_game_loss(z[0], z[1])

    _, best_joint, _, _ = best_fixed_decision([joint_loss], BallDomain(radius, (2,)))
    ogd_avg_regret = float(np.mean(ogd_losses) - best_joint)
    return OcoDemoReport(
        T=T, scripted_joint_losses=scripted_losses,
        scripted_player_best=best_avg,
        scripted_player_regret=played_avg - best_avg,
        scripted_regret_per_round=float(np.mean(scripted_losses) - 0.0),
        ogd_joint_losses=ogd_losses, ogd_avg_regret=ogd_avg_regret)


@dataclass
class SharedControlsReport:
    T: int
    u1: np.ndarray
    regret_traj1: float
    regret_traj2: float

    @property
    def max_regret(self):
        return max(self.regret_traj1, self.regret_traj2)


def demo_shared_controls(agent1_strategy, T):
    """Adversarial construction showing control sharing is necessary.

    A deterministic first agent choosing from constant policies in [0, 1] sees
    identical costs (always 1) and states (always 0) on two open-loop worlds for
    the other agents, so it plays the same sequence on both; its average regret
    on one of the two must then be at least 1/4.
    """
    u1 = np.zeros(T)
    costs_seen = []
    history = []
    for t in range(T):
        u = float(agent1_strategy(costs_seen, history))
        if not 0.0 <= u <= 1.0:
            warnings.warn(f"strategy output {u} outside [0, 1]; clamping")
            u = float(np.clip(u, 0.0, 1.0))
        u1[t] = u
        history.append(u)
        costs_seen.append(1.0)
    regrets = []
    for u2_const in (0.0, 1.0):
        u2 = np.full(T, u2_const)
        u3 = np.sqrt(1.0 - (u1 - u2) ** 2)
        realized = (u1 - u2) ** 2 + u3 ** 2
        assert np.allclose(realized, 1.0)
        # best constant z for agent 1 in hindsight against this world
        z = float(np.clip(np.mean(u2), 0.0, 1.0))
        comparator = float(np.mean((z - u2) ** 2 + u3 ** 2))
        regrets.append(float(np.mean(realized)) - comparator)
    return SharedControlsReport(T=T, u1=u1, regret_traj1=regrets[0],
                                regret_traj2=regrets[1])


def constant_strategy(c):
    return lambda costs, history: c


def cost_descent_strategy(x0=0.3, eta=0.1, delta=1e-3):
    """Deterministic descent on observed cost differences; stays put when the
    cost signal carries no information."""
    def strategy(costs, history):
        if len(costs) < 2:
            return x0
        grad_est = (costs[-1] - costs[-2]) / delta
        return float(np.clip(history[-1] - eta * grad_est, 0.0, 1.0))
    return strategy
