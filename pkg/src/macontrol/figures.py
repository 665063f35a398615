"""Figure rendering for experiment reports.

Renders static matplotlib figures to files next to the delimited output. All
figures are generated headlessly and carry no timestamps, so rerunning an
identical invocation rewrites identical content.
"""

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path):
    fig.savefig(path, dpi=120, metadata={"Software": None, "CreationDate": None})
    import matplotlib.pyplot as plt
    plt.close(fig)


def render_run_figure(log, path, title=""):
    """Cost and state-norm curves for one experiment run."""
    plt = _plt()
    t = np.arange(1, log.T + 1)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(t, log.costs, lw=0.6, alpha=0.6, label="instantaneous")
    ax1.plot(t, log.avg_costs, lw=1.5, label="running average")
    ax1.set_ylabel("cost")
    ax1.set_yscale("log")
    ax1.legend(loc="best", fontsize=8)
    if title:
        ax1.set_title(title)
    ax2.plot(t, log.state_norms, lw=0.8)
    ax2.set_ylabel("state norm")
    ax2.set_xlabel("t")
    if log.failed.any():
        t_fail = int(np.argmax(log.failed)) + 1
        for ax in (ax1, ax2):
            ax.axvline(t_fail, color="red", ls="--", lw=0.8)
    fig.tight_layout()
    _save(fig, path)


def render_regret_figure(decomp, path, title="regret decomposition"):
    """Bar chart of the four regret terms against the measured total."""
    plt = _plt()
    labels = ["burn-in", "alg trunc", "policy regret", "comp trunc", "total"]
    vals = [decomp.burn_in, decomp.alg_truncation, decomp.policy_regret,
            decomp.comp_truncation, decomp.total_regret]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, vals, color=["C0", "C1", "C2", "C3", "C4"])
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_ylabel("average regret contribution")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def render_oco_demo_figure(report, path):
    """Joint losses of the scripted pair vs the linearized reduction."""
    plt = _plt()
    t = np.arange(1, report.T + 1)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.plot(t, report.scripted_joint_losses, label="scripted alternation")
    ax.plot(t, report.ogd_joint_losses, label="linearized OGD")
    ax.set_xlabel("t")
    ax.set_ylabel("joint loss")
    ax.set_xscale("log")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_shared_controls_figure(reports, path):
    """Per-strategy average regrets on the two adversarial worlds."""
    plt = _plt()
    names = list(reports)
    r1 = [reports[n].regret_traj1 for n in names]
    r2 = [reports[n].regret_traj2 for n in names]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.bar(x - 0.2, r1, width=0.4, label="world 1")
    ax.bar(x + 0.2, r2, width=0.4, label="world 2")
    ax.axhline(0.25, color="red", ls="--", lw=0.8, label="1/4 floor")
    ax.set_xticks(x, names, rotation=20, fontsize=8)
    ax.set_ylabel("average regret")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)
