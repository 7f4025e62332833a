"""SVG figures for an :class:`~qrbackward.harness.ErrorReport` (needs matplotlib)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_report(report, directory):
    case = report.config.case
    paths = []

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for res in report.results:
        idx = np.arange(1, len(res.err_u) + 1)
        axes[0].plot(idx, res.err_u, marker=".", lw=0.8, label=f"eps={res.epsilon:g}")
        axes[1].plot(idx, res.err_v, marker=".", lw=0.8, label=f"eps={res.epsilon:g}")
    for ax, name in zip(axes, ("u", "v")):
        ax.set_xlabel("sample")
        ax.set_ylabel(f"error in {name}")
        ax.legend()
    fig.suptitle(f"{case}: per-sample errors")
    fig.tight_layout()
    path = directory / f"{case}_samples.svg"
    fig.savefig(path, format="svg")
    plt.close(fig)
    paths.append(path)

    eps = np.array([r.epsilon for r in report.results])
    mean_u = np.array([r.mean_u for r in report.results])
    mean_v = np.array([r.mean_v for r in report.results])
    rate = np.array([r.params["predicted_rate"] for r in report.results])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(eps, mean_u, "o-", label="E_u")
    ax.loglog(eps, mean_v, "s-", label="E_v")
    # predicted shape has no constant; pin it to the first combined error for comparison
    ax.loglog(eps, rate * (mean_u[0] + mean_v[0]) / rate[0], "k--", label="predicted shape")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("averaged error")
    ax.legend()
    fig.tight_layout()
    path = directory / f"{case}_rate.svg"
    fig.savefig(path, format="svg")
    plt.close(fig)
    paths.append(path)
    return paths
