"""Figure rendering for selection runs and transfer-function benchmarks."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_convergence(traces: dict, path, title: str = "Convergence",
                     ylabel: str = "best fitness"):
    """Overlay per-iteration incumbent traces, one line per label.

    traces maps a label to either a single trace (list of floats) or a list
    of per-repeat traces, which are averaged pointwise.
    """
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, trace in traces.items():
        if trace and isinstance(trace[0], (list, tuple)):
            n = min(len(t) for t in trace)
            avg = [sum(t[i] for t in trace) / len(trace) for i in range(n)]
            ax.plot(range(n), avg, label=label)
        else:
            ax.plot(range(len(trace)), trace, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_tf_comparison(rows: list, path):
    """Bar chart of mean accuracy and mean selected genes per TF.

    rows: list of dicts with keys tf, mean_accuracy, mean_genes.
    """
    tags = [r["tf"] for r in rows]
    accs = [r["mean_accuracy"] for r in rows]
    genes = [r["mean_genes"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.bar(tags, accs, color="tab:blue")
    ax1.set_ylabel("mean accuracy")
    ax1.set_ylim(0, 1.05)
    ax2.bar(tags, genes, color="tab:orange")
    ax2.set_ylabel("mean selected genes")
    for ax in (ax1, ax2):
        ax.set_xlabel("transfer function")
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
