"""Delimited report files.

Every value in the report CSVs is derived from (config, seed) alone, so a
rerun with the same arguments is byte-identical; wall-clock measurements go
to a separate timings file that is exempt from that guarantee. Each report
embeds a digest of the run configuration in a leading comment line.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from statistics import mean, stdev


def config_digest(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_csv(path, header, rows, digest: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if digest is not None:
            fh.write(f"# config={digest}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def summarize(values: list[float]) -> tuple[float, float]:
    """(mean, sample std); std is 0 for fewer than two samples."""
    m = mean(values)
    s = stdev(values) if len(values) >= 2 else 0.0
    return m, s


STATIC_COLUMNS = (
    "seed", "ru", "conflicting_pct", "comm_cost_pct", "power_w", "active_servers"
)

EPOCH_COLUMNS = (
    "seed", "epoch", "ru", "conflicting_pct", "comm_cost_pct", "power_w",
    "active_servers", "migrations", "migration_cost", "network_cost",
    "activation_cost",
)


def static_summary_row(strategy, n_vms, n_servers, n_users, rows) -> tuple[tuple, tuple]:
    """Aggregate per-seed static rows into the mean/deviation summary row."""
    ru_m, ru_s = summarize([r[1] for r in rows])
    phi_m, phi_s = summarize([r[2] for r in rows])
    theta_m, theta_s = summarize([r[3] for r in rows])
    pw_m, _ = summarize([r[4] for r in rows])
    act_m, _ = summarize([float(r[5]) for r in rows])
    header = (
        "strategy", "vms", "servers", "users", "repeat",
        "ru_mean", "ru_std", "power_w_mean",
        "conflicting_pct_mean", "conflicting_pct_std",
        "comm_cost_pct_mean", "comm_cost_pct_std", "active_servers_mean",
    )
    row = (
        strategy, n_vms, n_servers, n_users, len(rows),
        ru_m, ru_s, pw_m, phi_m, phi_s, theta_m, theta_s, act_m,
    )
    return header, row


def improvement_pct(reference: float, other: float, maximize: bool) -> float:
    """Relative gain of `reference` over `other` in percent."""
    if other == 0:
        return 0.0
    if maximize:
        return 100.0 * (reference - other) / other
    return 100.0 * (other - reference) / other
