"""The three comparison figures.

Every entry point validates its input fully before any drawing starts, so a
schema error never leaves a half-written image behind. Seeds are collapsed
with the median, matching how the experiment harness reports its tables.
"""

import matplotlib

matplotlib.use("Agg")  # never require a display
matplotlib.rcParams["svg.fonttype"] = "none"  # keep SVG text selectable

import matplotlib.pyplot as plt

from .io import median, policies_in_order, read_summary, read_sweep

FORMATS = ("svg", "png")

# stable policy -> marker assignment keeps repeated renders comparable
_MARKERS = ("o", "s", "^", "D", "v", "P", "X")


def _median_by_multiplier(rows, policy, field):
    xs = sorted({r.load_multiplier for r in rows})
    ys = []
    for x in xs:
        group = [getattr(r, field) for r in rows
                 if r.policy == policy and r.load_multiplier == x]
        ys.append(median(group) if group else None)
    pairs = [(x, y) for x, y in zip(xs, ys) if y is not None]
    return [x for x, _ in pairs], [y for _, y in pairs]


def _sweep_lines(rows, field, ylabel, title, clamp01=False):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, policy in enumerate(policies_in_order(r.policy for r in rows)):
        xs, ys = _median_by_multiplier(rows, policy, field)
        ax.plot(xs, ys, marker=_MARKERS[i % len(_MARKERS)], label=policy)
    ax.set_xlabel("load multiplier")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if clamp01:
        ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def _save(fig, out_path, fmt):
    if fmt not in FORMATS:
        plt.close(fig)
        raise ValueError(f"format must be one of {', '.join(FORMATS)}, got {fmt!r}")
    try:
        fig.savefig(out_path, format=fmt)
    finally:
        plt.close(fig)
    return out_path


def plot_response_time(in_path, out_path, fmt="svg"):
    """Median mean response time per policy across the load sweep."""
    rows = read_sweep(in_path)
    fig = _sweep_lines(rows, "mean_rt", "mean response time (s)",
                       "Response time vs offered load")
    return _save(fig, out_path, fmt)


def plot_completion_rate(in_path, out_path, fmt="svg"):
    """Median completion rate per policy across the load sweep; y in [0, 1]."""
    rows = read_sweep(in_path)
    fig = _sweep_lines(rows, "completion_rate", "completion rate",
                       "Completions inside the horizon vs offered load",
                       clamp01=True)
    return _save(fig, out_path, fmt)


def plot_utilization(in_path, out_path, fmt="svg"):
    """Per-policy mean utilization bars; whiskers show the across-server
    spread (std), the balance measure the policies compete on."""
    entries = read_summary(in_path)
    policies = policies_in_order(e["policy_name"] for e in entries)
    heights, errors = [], []
    for policy in policies:
        group = [e for e in entries if e["policy_name"] == policy]
        heights.append(median([e["mean_util"] for e in group]))
        errors.append(median([e["std_util_across_servers"] for e in group]))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    xs = range(len(policies))
    ax.bar(xs, heights, yerr=errors, capsize=4, color="tab:blue", alpha=0.85)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(policies, rotation=15)
    ax.set_ylabel("mean server utilization")
    ax.set_ylim(0.0, 1.0)
    ax.set_title("Utilization level and across-server spread")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return _save(fig, out_path, fmt)
