"""Report artifacts: delimited files plus rendered figures.

Every report directory holds CSVs (plot-ready, one per figure panel) and a
PNG rendered from each of them.  All numeric text is written with ``repr``
so identical inputs produce byte-identical files; figures carry no
timestamps but are not byte-pinned.

CSV schemas
-----------
``bode_closedloop.csv``
    omega, re, im, gain_db, phase_deg, gain_error_db, phase_error_deg,
    envelope_low_db, envelope_high_db, loop_error_abs.  Complex columns hold
    the closed loop T(iw); gain_error_db is the signed distance outside the
    reference envelope (zero inside); loop_error_abs is |T - M| against the
    nearest family member.
``controller_bode.csv``
    omega, re, im, gain_db, phase_deg of the fitted controller.
``step.csv``
    t, loop, ref_1 .. ref_ns: synthesized step responses of the closed loop
    and of every reference member.
``loewner_singular_values.csv``
    k, sigma: singular values of the row-concatenated Loewner pencil,
    1-based, unnormalized.
``aaa_iterations.csv``
    ell, max_error, selected_omega: greedy iteration trace.
``vf_iterations.csv``
    iter, pole_movement, ls_residual: relocation trace.
``summary.csv``
    method, order, residual_max, residual_rms, winding_count per design.

``design_report.json`` carries the scalar diagnostics (method, order,
residuals, pole classification, winding count, notes) with sorted keys.
"""

import json
import os

import numpy as np

from .modelio import save_model
from .pipeline import DesignReport, callable_only


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, columns) -> None:
    """Write named columns of equal length as decimal text."""
    columns = [np.asarray(c) for c in columns]
    n = columns[0].shape[0]
    if any(c.shape != (n,) for c in columns):
        raise ValueError("columns must share one length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(_fmt(c[i]) for c in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read a header + decimal-text CSV back into named float columns."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    if any(len(r) != len(header) for r in rows):
        raise ValueError(f"{path}: ragged rows")
    data = np.array([[float(x) for x in r] for r in rows]) if rows else \
        np.empty((0, len(header)))
    return header, {name: data[:, j] for j, name in enumerate(header)}


def _use_agg():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def write_bode_closedloop(outdir, report: DesignReport) -> str:
    path = os.path.join(outdir, "bode_closedloop.csv")
    values = report.loop_values
    gain_db = 20 * np.log10(np.abs(values))
    phase = np.degrees(np.unwrap(np.angle(values)))
    write_csv(path,
              ["omega", "re", "im", "gain_db", "phase_deg", "gain_error_db",
               "phase_error_deg", "envelope_low_db", "envelope_high_db",
               "loop_error_abs"],
              [report.omega, values.real, values.imag, gain_db, phase,
               report.gain_error_db, report.phase_error_deg,
               report.envelope_low_db, report.envelope_high_db,
               report.loop_error_abs])
    return path


def write_controller_bode(outdir, report: DesignReport) -> str:
    path = os.path.join(outdir, "controller_bode.csv")
    k = np.asarray(report.controller(1j * report.omega))
    write_csv(path, ["omega", "re", "im", "gain_db", "phase_deg"],
              [report.omega, k.real, k.imag, 20 * np.log10(np.abs(k)),
               np.degrees(np.unwrap(np.angle(k)))])
    return path


def write_step(outdir, report: DesignReport) -> str:
    path = os.path.join(outdir, "step.csv")
    refs = report.step_references
    header = ["t", "loop"] + [f"ref_{j + 1}" for j in range(refs.shape[0])]
    write_csv(path, header,
              [report.step_t, report.step_loop] + list(refs))
    return path


def write_engine_trace(outdir, design) -> str:
    """Per-engine diagnostic CSV; schema depends on the method."""
    diag = design.diagnostics
    if design.method == "loewner":
        sigma = diag.detection.singular_values
        path = os.path.join(outdir, "loewner_singular_values.csv")
        write_csv(path, ["k", "sigma"],
                  [np.arange(1, sigma.size + 1), sigma])
        return path
    if design.method == "aaa":
        rows = diag.history_rows()
        path = os.path.join(outdir, "aaa_iterations.csv")
        write_csv(path, ["ell", "max_error", "selected_omega"],
                  [np.array([r[0] for r in rows]),
                   np.array([r[1] for r in rows]),
                   np.array([r[2] for r in rows])])
        return path
    rows = diag.history_rows()
    path = os.path.join(outdir, "vf_iterations.csv")
    write_csv(path, ["iter", "pole_movement", "ls_residual"],
              [np.array([r[0] for r in rows]),
               np.array([r[1] for r in rows]),
               np.array([r[2] for r in rows])])
    return path


def write_design_report(outdir, design, report: DesignReport,
                        extra: dict = None) -> str:
    """Scalar diagnostics as a JSON document with sorted keys."""
    path = os.path.join(outdir, "design_report.json")
    doc = {
        "method": report.method,
        "order": int(report.order),
        "residual_max": report.residual_max,
        "residual_rms": report.residual_rms,
        "poles": [[p.real, p.imag, label] for p, label in report.pole_report],
        "winding_count": int(report.winding_count),
        "notes": list(report.notes),
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_summary(outdir, designs, reports, extra_columns: dict = None) -> str:
    """One-row-per-method overview of a multi-engine run."""
    path = os.path.join(outdir, "summary.csv")
    header = ["method", "order", "residual_max", "residual_rms",
              "winding_count"]
    extra_columns = extra_columns or {}
    header += list(extra_columns)
    lines = [",".join(header)]
    for design, report in zip(designs, reports):
        row = [design.method, str(design.order), _fmt(design.residual_max),
               _fmt(design.residual_rms), str(report.winding_count)]
        row += [str(extra_columns[k]) for k in extra_columns]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def save_controller(outdir, design) -> str:
    path = os.path.join(outdir, f"controller_{design.method}.json")
    if callable_only(design.model):
        raise ValueError("controller lacks a serializable model form")
    save_model(design.model, path)
    return path


# -- figures -----------------------------------------------------------

def render_bode_closedloop(outdir, report: DesignReport) -> str:
    plt = _use_agg()
    path = os.path.join(outdir, "bode_closedloop.png")
    values = report.loop_values
    fig, (ax_g, ax_p) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    ax_g.fill_between(report.omega, report.envelope_low_db,
                      report.envelope_high_db, alpha=0.25, color="tab:gray",
                      label="reference envelope")
    ax_g.semilogx(report.omega, 20 * np.log10(np.abs(values)), "tab:blue",
                  label=f"closed loop ({report.method}, order {report.order})")
    ax_g.set_ylabel("gain [dB]")
    ax_g.legend(loc="lower left", fontsize=8)
    ax_p.semilogx(report.omega, np.degrees(np.unwrap(np.angle(values))),
                  "tab:blue")
    ax_p.set_ylabel("phase [deg]")
    ax_p.set_xlabel("omega [rad/s]")
    for ax in (ax_g, ax_p):
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_controller_bode(outdir, report: DesignReport) -> str:
    plt = _use_agg()
    path = os.path.join(outdir, "controller_bode.png")
    k = np.asarray(report.controller(1j * report.omega))
    fig, (ax_g, ax_p) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    ax_g.semilogx(report.omega, 20 * np.log10(np.abs(k)), "tab:red")
    ax_g.set_ylabel("gain [dB]")
    ax_p.semilogx(report.omega, np.degrees(np.unwrap(np.angle(k))), "tab:red")
    ax_p.set_ylabel("phase [deg]")
    ax_p.set_xlabel("omega [rad/s]")
    for ax in (ax_g, ax_p):
        ax.grid(True, which="both", alpha=0.3)
    fig.suptitle(f"controller, {report.method}, order {report.order}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_step(outdir, report: DesignReport) -> str:
    plt = _use_agg()
    path = os.path.join(outdir, "step.png")
    fig, ax = plt.subplots(figsize=(7, 4))
    for j, ref in enumerate(report.step_references):
        ax.plot(report.step_t, ref, color="tab:gray", alpha=0.6, lw=1,
                label="reference" if j == 0 else None)
    ax.plot(report.step_t, report.step_loop, "tab:blue",
            label=f"closed loop ({report.method})")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("step response")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_engine_trace(outdir, design) -> str:
    plt = _use_agg()
    diag = design.diagnostics
    if design.method == "loewner":
        path = os.path.join(outdir, "loewner_singular_values.png")
        sigma = diag.detection.singular_values
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(np.arange(1, sigma.size + 1), sigma / sigma[0], "o-",
                    ms=3)
        ax.axhline(diag.detection.tol, color="tab:red", lw=1,
                   label=f"rank tolerance {diag.detection.tol:g}")
        ax.axvline(diag.detection.order, color="tab:gray", lw=1,
                   label=f"detected order {diag.detection.order}")
        ax.set_xlabel("k")
        ax.set_ylabel("sigma_k / sigma_1")
        ax.legend(fontsize=8)
    elif design.method == "aaa":
        path = os.path.join(outdir, "aaa_iterations.png")
        rows = diag.history_rows()
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy([r[0] for r in rows], [r[1] for r in rows], "o-", ms=3)
        ax.set_xlabel("support points")
        ax.set_ylabel("max error")
    else:
        path = os.path.join(outdir, "vf_iterations.png")
        rows = diag.history_rows()
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy([r[0] for r in rows], [max(r[1], 1e-300) for r in rows],
                    "o-", ms=3)
        ax.set_xlabel("iteration")
        ax.set_ylabel("pole movement")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def emit_design_artifacts(outdir, design, report: DesignReport,
                          extra: dict = None, figures: bool = True) -> list:
    """All files for one design: model, report JSON, CSVs, figures."""
    os.makedirs(outdir, exist_ok=True)
    paths = [
        save_controller(outdir, design),
        write_design_report(outdir, design, report, extra=extra),
        write_bode_closedloop(outdir, report),
        write_controller_bode(outdir, report),
        write_engine_trace(outdir, design),
    ]
    if report.step_t.size:
        paths.append(write_step(outdir, report))
    if figures:
        paths.append(render_bode_closedloop(outdir, report))
        paths.append(render_controller_bode(outdir, report))
        paths.append(render_engine_trace(outdir, design))
        if report.step_t.size:
            paths.append(render_step(outdir, report))
    return paths
