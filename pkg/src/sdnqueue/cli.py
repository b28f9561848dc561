"""Command-line front end: analysis reports, tables, simulations, figure data.

One subcommand per task: ``analyze`` (balance solution + stability verdict),
``distribution`` (pdf/ccdf/quantile tables), ``simulate`` (single-node DES),
``chain`` (tandem chain, analytic and simulated), ``dimension`` (admissible
throughput), ``sweep`` (generic one-variable sweep), ``figure`` (canned data
files fig2..fig6) and ``validate`` (the acceptance suite).

Parameters come from flags, from a JSON config file with sections
{node|chain, controller, sim, sweep, output}, or both; flags override file
values.  Service rates may be given per second (``mu_switch``) or as mean
service times in microseconds (``mu_switch_us``); giving both forms of the
same parameter in one source is an error.

Exit codes: 0 success, 1 usage/config error, 2 model unstable, 3 validation
failure.  CSV output is RFC-4180 style (header row, '.' decimal separator,
CRLF line ends); identical inputs and seed give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

from .analytic import (
    ChainModel,
    ControllerParams,
    NodeParams,
    UnstableSystemError,
    chain_sojourn,
    mean_sojourn_jackson,
    mean_sojourn_openflow,
    rate_from_us,
    solve_chain,
    solve_rates,
)
from .distribution import build_distribution, ccdf, pdf, prob_within_deadline, quantile
from .dimensioning import (
    SWEEP_OUTPUTS,
    SWEEP_VARIABLES,
    SweepSpec,
    default_delay_bound_grid,
    max_throughput,
    sweep,
    zero_load_sojourn,
)
from .simulate import SimConfig, run_chain, run_single_node
from . import validation

SEED_ENV_VAR = "SDNQUEUE_SEED"
_DEFAULT_SEED = 12345
_DEFAULT_Q_SET = (0.2, 0.5, 1.0)
_DEFAULT_MU_C_US_SET = (120.0, 240.0, 480.0)
_FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")

_CONFIG_SECTIONS = {"node", "chain", "controller", "sim", "sweep", "output"}
_NODE_KEYS = {"lambda", "q_nf", "mu_switch", "mu_switch_us"}
_CTRL_KEYS = {"mu_controller", "mu_controller_us"}
_SIM_KEYS = {"seed", "packets_per_replication", "replications", "warmup_fraction"}
_SWEEP_KEYS = {"variable", "grid", "outputs", "deadline"}
_OUTPUT_KEYS = {"path", "format"}


class CliError(Exception):
    """Usage or configuration error; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description (the JSON config round-trips through it)."""

    node: NodeParams | None
    chain: ChainModel | None
    controller: ControllerParams
    sim: SimConfig
    sweep: SweepSpec | None
    output_path: str | None
    output_format: str = "csv"


def runconfig_to_dict(cfg: RunConfig) -> dict:
    doc: dict = {}
    if cfg.node is not None:
        doc["node"] = {"lambda": cfg.node.lam, "q_nf": cfg.node.q_nf,
                       "mu_switch": cfg.node.mu_switch}
    if cfg.chain is not None:
        doc["chain"] = {"nodes": [{"lambda": n.lam, "q_nf": n.q_nf,
                                   "mu_switch": n.mu_switch} for n in cfg.chain.nodes]}
    doc["controller"] = {"mu_controller": cfg.controller.mu_controller}
    doc["sim"] = {"seed": cfg.sim.seed,
                  "packets_per_replication": cfg.sim.packets_per_replication,
                  "replications": cfg.sim.replications,
                  "warmup_fraction": cfg.sim.warmup_fraction}
    if cfg.sweep is not None:
        doc["sweep"] = {"variable": cfg.sweep.variable,
                        "grid": list(cfg.sweep.grid),
                        "outputs": list(cfg.sweep.outputs),
                        "deadline": cfg.sweep.deadline}
    doc["output"] = {"path": cfg.output_path, "format": cfg.output_format}
    return doc


def runconfig_from_dict(doc: dict) -> RunConfig:
    _check_keys("config", doc, _CONFIG_SECTIONS)
    if "node" in doc and "chain" in doc:
        raise CliError("config must give either 'node' or 'chain', not both")
    controller = _controller_from_section(doc.get("controller", {}))
    node = _node_from_section(doc["node"]) if "node" in doc else None
    chain = None
    if "chain" in doc:
        chain_sec = doc["chain"]
        _check_keys("chain", chain_sec, {"nodes"})
        nodes = tuple(_node_from_section(s) for s in chain_sec.get("nodes", []))
        chain = ChainModel(nodes=nodes, controller=controller)
    sim = _sim_from_section(doc.get("sim", {}), seed_default=_env_seed())
    spec = None
    if "sweep" in doc:
        if node is None:
            raise CliError("a 'sweep' section needs a 'node' section")
        spec = _sweep_from_section(doc["sweep"], node, controller, sim)
    out = doc.get("output", {})
    _check_keys("output", out, _OUTPUT_KEYS)
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise CliError(f"output.format must be 'csv' or 'json', got {fmt!r}")
    return RunConfig(node=node, chain=chain, controller=controller, sim=sim,
                     sweep=spec, output_path=out.get("path"), output_format=fmt)


def runconfig_to_json(cfg: RunConfig) -> str:
    return json.dumps(runconfig_to_dict(cfg), indent=2, sort_keys=True)


def runconfig_from_json(text: str) -> RunConfig:
    return runconfig_from_dict(json.loads(text))


def _check_keys(section: str, d: dict, allowed: set[str]) -> None:
    if not isinstance(d, dict):
        raise CliError(f"config section {section!r} must be an object")
    for key in d:
        if key not in allowed:
            raise CliError(f"unknown key {key!r} in config section {section!r}; "
                           f"allowed: {sorted(allowed)}")


def _rate_from_pair(section: dict, rate_key: str, us_key: str, what: str,
                    flag_rate: float | None = None,
                    flag_us: float | None = None) -> float:
    if flag_rate is not None and flag_us is not None:
        raise CliError(f"give either --{rate_key.replace('_', '-')} or "
                       f"--{us_key.replace('_', '-')}, not both")
    if flag_rate is not None:
        return float(flag_rate)
    if flag_us is not None:
        return rate_from_us(float(flag_us))
    has_rate = section.get(rate_key) is not None
    has_us = section.get(us_key) is not None
    if has_rate and has_us:
        raise CliError(f"config gives both {rate_key!r} and {us_key!r}; pick one")
    if has_rate:
        return float(section[rate_key])
    if has_us:
        return rate_from_us(float(section[us_key]))
    raise CliError(f"missing {what}: set {rate_key!r} (per second) or "
                   f"{us_key!r} (microseconds)")


def _node_from_section(section: dict, args=None) -> NodeParams:
    _check_keys("node", section, _NODE_KEYS)
    lam = getattr(args, "lam", None) if args is not None else None
    q_nf = getattr(args, "q_nf", None) if args is not None else None
    if lam is None:
        lam = section.get("lambda")
    if q_nf is None:
        q_nf = section.get("q_nf")
    if lam is None:
        raise CliError("missing 'lambda' (external arrival rate, per second)")
    if q_nf is None:
        raise CliError("missing 'q_nf' (new-flow probability)")
    mu = _rate_from_pair(section, "mu_switch", "mu_switch_us", "switch service rate",
                         getattr(args, "mu_switch", None) if args is not None else None,
                         getattr(args, "mu_switch_us", None) if args is not None else None)
    try:
        return NodeParams(lam=float(lam), mu_switch=mu, q_nf=float(q_nf))
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _controller_from_section(section: dict, args=None) -> ControllerParams:
    _check_keys("controller", section, _CTRL_KEYS)
    mu = _rate_from_pair(section, "mu_controller", "mu_controller_us",
                         "controller service rate",
                         getattr(args, "mu_controller", None) if args is not None else None,
                         getattr(args, "mu_controller_us", None) if args is not None else None)
    try:
        return ControllerParams(mu_controller=mu)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _env_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return _DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise CliError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def _sim_from_section(section: dict, args=None, seed_default: int | None = None) -> SimConfig:
    _check_keys("sim", section, _SIM_KEYS)
    if seed_default is None:
        seed_default = _env_seed()
    def pick(flag_name, key, default):
        val = getattr(args, flag_name, None) if args is not None else None
        if val is None:
            val = section.get(key)
        return default if val is None else val
    try:
        return SimConfig(
            seed=int(pick("seed", "seed", seed_default)),
            packets_per_replication=int(pick("packets", "packets_per_replication", 200_000)),
            replications=int(pick("replications", "replications", 5)),
            warmup_fraction=float(pick("warmup_fraction", "warmup_fraction", 0.1)),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _parse_grid(raw) -> tuple[float, ...]:
    if isinstance(raw, dict):
        _check_keys("sweep.grid", raw, {"start", "stop", "count", "spacing"})
        try:
            start, stop = float(raw["start"]), float(raw["stop"])
            count = int(raw.get("count", 10))
        except KeyError as exc:
            raise CliError(f"sweep.grid needs {exc.args[0]!r}") from exc
        spacing = raw.get("spacing", "linear")
        return _make_grid(start, stop, count, spacing)
    if isinstance(raw, str):
        if ":" in raw:
            parts = raw.split(":")
            if len(parts) not in (3, 4):
                raise CliError("grid spec must be start:stop:count[:log]")
            spacing = parts[3] if len(parts) == 4 else "linear"
            return _make_grid(float(parts[0]), float(parts[1]), int(parts[2]), spacing)
        return tuple(float(x) for x in raw.split(","))
    return tuple(float(x) for x in raw)


def _make_grid(start: float, stop: float, count: int, spacing: str) -> tuple[float, ...]:
    if count < 1:
        raise CliError("grid count must be >= 1")
    if count == 1:
        return (start,)
    if spacing == "log":
        if start <= 0:
            raise CliError("log grid needs start > 0")
        ls, le = math.log(start), math.log(stop)
        return tuple(math.exp(ls + (le - ls) * k / (count - 1)) for k in range(count))
    if spacing != "linear":
        raise CliError(f"grid spacing must be 'linear' or 'log', got {spacing!r}")
    return tuple(start + (stop - start) * k / (count - 1) for k in range(count))


def _sweep_from_section(section: dict, node: NodeParams, ctrl: ControllerParams,
                        sim: SimConfig, args=None) -> SweepSpec:
    _check_keys("sweep", section, _SWEEP_KEYS)
    def pick(flag_name, key):
        val = getattr(args, flag_name, None) if args is not None else None
        return section.get(key) if val is None else val
    variable = pick("variable", "variable")
    if variable is None:
        raise CliError("missing 'variable' in sweep section")
    raw_grid = pick("grid", "grid")
    if raw_grid is None:
        raise CliError("missing 'grid' in sweep section")
    outputs = pick("outputs", "outputs")
    if outputs is None:
        outputs = ("analytic_mean",)
    elif isinstance(outputs, str):
        outputs = tuple(s.strip() for s in outputs.split(","))
    else:
        outputs = tuple(outputs)
    deadline = pick("deadline", "deadline")
    deadline = 5e-4 if deadline is None else float(deadline)
    try:
        return SweepSpec(variable=str(variable), grid=_parse_grid(raw_grid),
                         node=node, controller=ctrl, outputs=outputs,
                         deadline=deadline, sim=sim)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise CliError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config file {path} is not valid JSON: {exc}") from exc
    _check_keys("config", doc, _CONFIG_SECTIONS)
    return doc


# ---------------------------------------------------------------------------
# table output

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_table(path: str | None, fmt: str, columns: list[str], rows: list[dict]) -> None:
    if fmt == "json":
        payload = {"columns": columns,
                   "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows]}
        text = json.dumps(payload, indent=2) + "\n"
        if path is None:
            sys.stdout.write(text)
        else:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return
    out = sys.stdout if path is None else open(path, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
    finally:
        if out is not sys.stdout:
            out.close()


# ---------------------------------------------------------------------------
# subcommands

def _resolve_output(args, doc: dict) -> tuple[str | None, str]:
    out_sec = doc.get("output", {})
    _check_keys("output", out_sec, _OUTPUT_KEYS)
    path = args.output if args.output is not None else out_sec.get("path")
    fmt = args.format if args.format is not None else out_sec.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise CliError(f"output format must be 'csv' or 'json', got {fmt!r}")
    return path, fmt


def _cmd_analyze(args) -> int:
    doc = _load_config(args.config)
    node = _node_from_section(doc.get("node", {}), args)
    ctrl = _controller_from_section(doc.get("controller", {}), args)
    rates = solve_rates(node, ctrl)
    stable = rates.stable
    print("parameters:")
    print(f"  lambda            {node.lam:.6f} /s")
    print(f"  mu_switch         {node.mu_switch:.6f} /s  ({1e6 / node.mu_switch:.3f} us)")
    print(f"  mu_controller     {ctrl.mu_controller:.6f} /s  ({1e6 / ctrl.mu_controller:.3f} us)")
    print(f"  q_nf              {node.q_nf}")
    print("balance solution:")
    print(f"  gamma_switch      {rates.gamma_switch:.6f} /s")
    print(f"  gamma_controller  {rates.gamma_controller:.6f} /s")
    print(f"  q_jack            {rates.q_jack:.12f}")
    print(f"  rho_switch        {rates.rho_switch:.6f}")
    print(f"  rho_controller    {rates.rho_controller:.6f}")
    row = {"lambda": node.lam, "mu_switch": node.mu_switch,
           "mu_controller": ctrl.mu_controller, "q_nf": node.q_nf,
           "gamma_switch": rates.gamma_switch,
           "gamma_controller": rates.gamma_controller, "q_jack": rates.q_jack,
           "rho_switch": rates.rho_switch, "rho_controller": rates.rho_controller}
    if stable:
        w_net = mean_sojourn_jackson(rates, node)
        w_path = mean_sojourn_openflow(node, ctrl, rates)
        print("mean sojourn:")
        print(f"  network form      {w_net * 1e6:.6f} us")
        print(f"  path form         {w_path * 1e6:.6f} us")
        print(f"  difference        {abs(w_net - w_path):.3e} s (consistency check)")
        verdict = "stable"
        row.update({"mean_sojourn_network": w_net, "mean_sojourn_path": w_path,
                    "verdict": verdict})
    else:
        verdict = "unstable: " + ", ".join(rates.saturated_stations())
        print("mean sojourn:       n/a (saturated)")
        row.update({"mean_sojourn_network": None, "mean_sojourn_path": None,
                    "verdict": verdict})
    print(f"verdict: {verdict}")
    path, fmt = _resolve_output(args, doc)
    if path:
        _write_table(path, fmt, list(row.keys()), [row])
    return 0 if stable else 2


def _cmd_distribution(args) -> int:
    doc = _load_config(args.config)
    node = _node_from_section(doc.get("node", {}), args)
    ctrl = _controller_from_section(doc.get("controller", {}), args)
    dist = build_distribution(node, ctrl, solve_rates(node, ctrl))
    if args.deadline_us is not None:
        deadline = args.deadline_us * 1e-6
        p = prob_within_deadline(dist, deadline)
        print(f"P(sojourn <= {args.deadline_us:g} us) = {p:.6f}")
    path, fmt = _resolve_output(args, doc)
    if args.quantiles:
        ps = [float(x) for x in args.quantiles.split(",")]
        rows = [{"p": p, "quantile": quantile(dist, p)} for p in ps]
        _write_table(path, fmt, ["p", "quantile"], rows)
        return 0
    t_max = args.t_max if args.t_max is not None else quantile(dist, 0.9999)
    points = args.points
    ts = [t_max * k / (points - 1) for k in range(points)]
    rows = [{"t": t, "pdf": float(pdf(dist, t)), "ccdf": float(ccdf(dist, t))}
            for t in ts]
    _write_table(path, fmt, ["t", "pdf", "ccdf"], rows)
    return 0


def _cmd_simulate(args) -> int:
    doc = _load_config(args.config)
    node = _node_from_section(doc.get("node", {}), args)
    ctrl = _controller_from_section(doc.get("controller", {}), args)
    cfg = _sim_from_section(doc.get("sim", {}), args)
    res = run_single_node(node, ctrl, cfg)
    print(f"replications        {cfg.replications} x {cfg.packets_per_replication} packets "
          f"(seed {cfg.seed}, warmup {cfg.warmup_fraction})")
    print(f"mean sojourn        {res.mean_sojourn * 1e6:.6f} us")
    print(f"95% CI halfwidth    {res.ci_halfwidth * 1e6:.6f} us")
    print(f"controller visits   {res.controller_visit_fraction:.6f} of packets")
    for i, m in enumerate(res.per_replication_means):
        print(f"  replication {i}     {m * 1e6:.6f} us")
    path, fmt = _resolve_output(args, doc)
    if path:
        columns = ["replication", "mean_sojourn", "ci_halfwidth",
                   "controller_visit_fraction"]
        rows = [{"replication": i, "mean_sojourn": m}
                for i, m in enumerate(res.per_replication_means)]
        rows.append({"replication": "all", "mean_sojourn": res.mean_sojourn,
                     "ci_halfwidth": res.ci_halfwidth,
                     "controller_visit_fraction": res.controller_visit_fraction})
        _write_table(path, fmt, columns, rows)
    return 0


def _parse_float_list(raw: str, what: str) -> list[float]:
    try:
        return [float(x) for x in raw.split(",")]
    except ValueError as exc:
        raise CliError(f"{what} must be a comma-separated list of numbers") from exc


def _chain_from_args(args) -> ChainModel:
    doc = _load_config(args.config)
    if "chain" in doc and args.lam is None:
        ctrl = _controller_from_section(doc.get("controller", {}), args)
        chain_sec = doc["chain"]
        _check_keys("chain", chain_sec, {"nodes"})
        nodes = tuple(_node_from_section(s) for s in chain_sec.get("nodes", []))
        if not nodes:
            raise CliError("chain.nodes must list at least one node")
        return ChainModel(nodes=nodes, controller=ctrl)
    if args.lam is None:
        raise CliError("give chain nodes via --lam/--q-nf/--mu-switch-us lists "
                       "or a config file with a 'chain' section")
    lams = _parse_float_list(args.lam, "--lam")
    qs = _parse_float_list(args.q_nf, "--q-nf") if args.q_nf else None
    if qs is None or len(qs) != len(lams):
        raise CliError("--q-nf must list one value per node")
    if args.mu_switch is not None and args.mu_switch_us is not None:
        raise CliError("give either --mu-switch or --mu-switch-us, not both")
    if args.mu_switch is not None:
        mus = _parse_float_list(args.mu_switch, "--mu-switch")
    elif args.mu_switch_us is not None:
        mus = [rate_from_us(v) for v in _parse_float_list(args.mu_switch_us, "--mu-switch-us")]
    else:
        raise CliError("missing switch service rates: --mu-switch or --mu-switch-us")
    if len(mus) == 1:
        mus = mus * len(lams)
    if len(mus) != len(lams):
        raise CliError("--mu-switch(-us) must list one value per node (or a single "
                       "shared value)")
    ctrl = _controller_from_section(_load_config(args.config).get("controller", {}), args)
    try:
        nodes = tuple(NodeParams(lam=l, mu_switch=m, q_nf=q)
                      for l, m, q in zip(lams, mus, qs))
        return ChainModel(nodes=nodes, controller=ctrl)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _cmd_chain(args) -> int:
    chain = _chain_from_args(args)
    solution = solve_chain(chain)
    print(f"controller: gamma {solution.gamma_controller:.6f} /s, "
          f"rho {solution.rho_controller:.6f}")
    for i, (node, r) in enumerate(zip(chain.nodes, solution.nodes)):
        print(f"node {i}: lambda {node.lam:g} /s, gamma {r.gamma_switch:.6f} /s, "
              f"q_jack {r.q_jack:.9f}, rho {r.rho_switch:.6f}")
    sojourns = chain_sojourn(chain, solution)  # raises if saturated -> exit 2
    sim_res = run_chain(chain, _sim_from_section(_load_config(args.config).get("sim", {}), args)) \
        if args.simulate else None
    columns = ["class", "lambda", "gamma_switch", "q_jack", "rho_switch",
               "analytic_mean"]
    if sim_res is not None:
        columns += ["sim_mean", "sim_ci"]
    rows = []
    for i, node in enumerate(chain.nodes):
        r = solution.nodes[i]
        row = {"class": i, "lambda": node.lam, "gamma_switch": r.gamma_switch,
               "q_jack": r.q_jack, "rho_switch": r.rho_switch,
               "analytic_mean": sojourns.per_class[i]}
        if sim_res is not None:
            row["sim_mean"] = sim_res.per_class[i].mean_sojourn
            row["sim_ci"] = sim_res.per_class[i].ci_halfwidth
        rows.append(row)
        print(f"class {i}: analytic mean {sojourns.per_class[i] * 1e6:.3f} us"
              + (f", simulated {rows[-1]['sim_mean'] * 1e6:.3f} us "
                 f"(ci {rows[-1]['sim_ci'] * 1e6:.3f})" if sim_res is not None else ""))
    agg = {"class": "aggregate", "analytic_mean": sojourns.aggregate}
    if sim_res is not None:
        agg["sim_mean"] = sim_res.aggregate.mean_sojourn
        agg["sim_ci"] = sim_res.aggregate.ci_halfwidth
    rows.append(agg)
    print(f"aggregate: analytic mean {sojourns.aggregate * 1e6:.3f} us"
          + (f", simulated {agg['sim_mean'] * 1e6:.3f} us (ci {agg['sim_ci'] * 1e6:.3f})"
             if sim_res is not None else ""))
    path, fmt = _resolve_output(args, _load_config(args.config))
    if path:
        _write_table(path, fmt, columns, rows)
    return 0


def _cmd_dimension(args) -> int:
    doc = _load_config(args.config)
    node_sec = doc.get("node", {})
    q_nf = args.q_nf if args.q_nf is not None else node_sec.get("q_nf")
    if q_nf is None:
        raise CliError("missing 'q_nf' (new-flow probability)")
    q_nf = float(q_nf)
    mu_switch = _rate_from_pair(node_sec, "mu_switch", "mu_switch_us",
                                "switch service rate", args.mu_switch, args.mu_switch_us)
    ctrl = _controller_from_section(doc.get("controller", {}), args)
    if args.delay_bound_us is not None:
        bound = args.delay_bound_us * 1e-6
        res = max_throughput(bound, q_nf=q_nf, mu_switch=mu_switch,
                             mu_controller=ctrl.mu_controller)
        note = "" if res.feasible else f" ({res.note})"
        print(f"max throughput for {args.delay_bound_us:g} us bound: "
              f"{res.rate:.3f} packets/s{note}")
        path, fmt = _resolve_output(args, doc)
        if path:
            _write_table(path, fmt,
                         ["delay_bound", "throughput", "feasible"],
                         [{"delay_bound": bound, "throughput": res.rate,
                           "feasible": res.feasible}])
        return 0
    grid = default_delay_bound_grid(q_nf, mu_switch, ctrl.mu_controller,
                                    points=args.curve_points)
    rows = [{"delay_bound": b,
             "throughput": max_throughput(b, q_nf=q_nf, mu_switch=mu_switch,
                                          mu_controller=ctrl.mu_controller).rate}
            for b in grid]
    path, fmt = _resolve_output(args, doc)
    _write_table(path, fmt, ["delay_bound", "throughput"], rows)
    return 0


def _cmd_sweep(args) -> int:
    doc = _load_config(args.config)
    node = _node_from_section(doc.get("node", {}), args)
    ctrl = _controller_from_section(doc.get("controller", {}), args)
    sim = _sim_from_section(doc.get("sim", {}), args)
    spec = _sweep_from_section(doc.get("sweep", {}), node, ctrl, sim, args)
    rows = sweep(spec)
    columns = [spec.variable]
    if spec.variable != "delay_bound":
        columns.append("lambda")
    for out in SWEEP_OUTPUTS:
        if out in spec.outputs:
            columns.append(out)
            if out == "simulated_mean":
                columns.append("sim_ci_halfwidth")
    columns.append("status")
    path, fmt = _resolve_output(args, doc)
    _write_table(path, fmt, columns, rows)
    return 0


def _figure_params(args) -> tuple[float, float, int]:
    mu_switch = rate_from_us(args.mu_switch_us) if args.mu_switch is None \
        else float(args.mu_switch)
    mu_ctrl = rate_from_us(args.mu_controller_us) if args.mu_controller is None \
        else float(args.mu_controller)
    seed = args.seed if args.seed is not None else _env_seed()
    return mu_switch, mu_ctrl, seed


def _cmd_figure(args) -> int:
    name = args.name
    if name not in _FIGURES:
        raise CliError(f"unknown figure {name!r}; expected one of {_FIGURES}")
    mu_switch, mu_ctrl, seed = _figure_params(args)
    packets = 20_000 if args.quick else args.packets
    sim = SimConfig(seed=seed, packets_per_replication=packets,
                    replications=args.replications)
    ctrl = ControllerParams(mu_ctrl)
    path = args.output if args.output is not None else f"{name}.csv"
    rho_grid = _parse_grid(args.rho_grid)
    q_set = _parse_float_list(args.q_set, "--q-set") if args.q_set else list(_DEFAULT_Q_SET)

    if name == "fig2":
        spec = SweepSpec(variable="rho_controller", grid=rho_grid,
                         node=NodeParams(1.0, mu_switch, args.q_nf),
                         controller=ctrl,
                         outputs=("naive_mean", "analytic_mean", "simulated_mean"),
                         sim=sim)
        rows = [{"rho_c": r["rho_controller"],
                 "naive_jackson_mean": r["naive_mean"],
                 "modified_jackson_mean": r["analytic_mean"],
                 "sim_mean": r["simulated_mean"],
                 "sim_ci": r["sim_ci_halfwidth"],
                 "status": r["status"]} for r in sweep(spec)]
        _write_table(path, args.format,
                     ["rho_c", "naive_jackson_mean", "modified_jackson_mean",
                      "sim_mean", "sim_ci", "status"], rows)
    elif name == "fig3":
        rows = []
        for q in (0.2, 1.0):
            spec = SweepSpec(variable="rho_controller", grid=rho_grid,
                             node=NodeParams(1.0, mu_switch, q), controller=ctrl,
                             outputs=("analytic_mean", "simulated_mean"), sim=sim)
            for r in sweep(spec):
                rows.append({"q_nf": q, "rho_c": r["rho_controller"],
                             "modified_jackson_mean": r["analytic_mean"],
                             "sim_mean": r["simulated_mean"],
                             "sim_ci": r["sim_ci_halfwidth"], "status": r["status"]})
        _write_table(path, args.format,
                     ["q_nf", "rho_c", "modified_jackson_mean", "sim_mean",
                      "sim_ci", "status"], rows)
    elif name == "fig4":
        # common log grid spanning every q's knee through deep saturation
        w0s = [zero_load_sojourn(q, mu_switch, mu_ctrl) for q in q_set]
        grid = _make_grid(1.05 * min(w0s), 100.0 * max(w0s), args.points, "log")
        columns = ["delay_bound"] + [f"throughput_qnf_{q:g}" for q in q_set]
        rows = []
        for bound in grid:
            row = {"delay_bound": bound}
            for q in q_set:
                row[f"throughput_qnf_{q:g}"] = max_throughput(
                    bound, q_nf=q, mu_switch=mu_switch, mu_controller=mu_ctrl).rate
            rows.append(row)
        _write_table(path, args.format, columns, rows)
    elif name == "fig5":
        mu_c_us_set = (_parse_float_list(args.mu_c_us_set, "--mu-c-us-set")
                       if args.mu_c_us_set else list(_DEFAULT_MU_C_US_SET))
        columns = ["rho_c"] + [f"sojourn_mu_c_us_{v:g}" for v in mu_c_us_set] + ["status"]
        rows = []
        for rho_c in rho_grid:
            row = {"rho_c": rho_c}
            notes = []
            for v in mu_c_us_set:
                mu_c = rate_from_us(v)
                lam = rho_c * mu_c / args.q_nf
                node = NodeParams(lam, mu_switch, args.q_nf)
                c = ControllerParams(mu_c)
                try:
                    row[f"sojourn_mu_c_us_{v:g}"] = mean_sojourn_openflow(
                        node, c, solve_rates(node, c))
                except UnstableSystemError as exc:
                    row[f"sojourn_mu_c_us_{v:g}"] = None
                    notes.append(f"mu_c_us={v:g} unstable: " + ", ".join(exc.stations))
            row["status"] = ";".join(notes) if notes else "ok"
            rows.append(row)
        _write_table(path, args.format, columns, rows)
    else:  # fig6
        deadline = args.deadline_us * 1e-6
        label = f"{args.deadline_us / 1000.0:g}ms"
        columns = ["rho_c"] + [f"p_within_{label}_qnf_{q:g}" for q in q_set] + ["status"]
        rows = []
        for rho_c in rho_grid:
            row = {"rho_c": rho_c}
            notes = []
            for q in q_set:
                lam = rho_c * mu_ctrl / q
                node = NodeParams(lam, mu_switch, q)
                try:
                    dist = build_distribution(node, ctrl, solve_rates(node, ctrl))
                    row[f"p_within_{label}_qnf_{q:g}"] = prob_within_deadline(dist, deadline)
                except UnstableSystemError as exc:
                    row[f"p_within_{label}_qnf_{q:g}"] = None
                    notes.append(f"q_nf={q:g} unstable: " + ", ".join(exc.stations))
            row["status"] = ";".join(notes) if notes else "ok"
            rows.append(row)
        _write_table(path, args.format, columns, rows)
    if path is not None:
        print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    numbers = None
    if args.criteria:
        try:
            numbers = tuple(int(x) for x in args.criteria.split(","))
        except ValueError as exc:
            raise CliError("--criteria must be a comma-separated list of "
                           "criterion numbers") from exc
    seed = args.seed if args.seed is not None else _env_seed()
    try:
        results = validation.run_criteria(numbers, quick=args.quick, seed=seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    for res in results:
        print(res.line())
    failed = [r.number for r in results if not r.passed]
    if failed:
        print(f"FAILED criteria: {failed}")
        return 3
    print(f"all {len(results)} criteria passed")
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def _add_output_flags(p: _Parser) -> None:
    p.add_argument("--output", help="output file (default: stdout for tables, "
                                    "or the config's output.path)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--config", help="JSON config file; flags override it")


def _add_node_flags(p: _Parser) -> None:
    p.add_argument("--lam", type=float, help="external arrival rate (packets/s)")
    p.add_argument("--q-nf", dest="q_nf", type=float, help="new-flow probability")
    p.add_argument("--mu-switch", dest="mu_switch", type=float,
                   help="switch service rate (packets/s)")
    p.add_argument("--mu-switch-us", dest="mu_switch_us", type=float,
                   help="mean switch service time (microseconds)")


def _add_controller_flags(p: _Parser) -> None:
    p.add_argument("--mu-controller", dest="mu_controller", type=float,
                   help="controller service rate (responses/s)")
    p.add_argument("--mu-controller-us", dest="mu_controller_us", type=float,
                   help="mean controller service time (microseconds)")


def _add_sim_flags(p: _Parser) -> None:
    p.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV_VAR} "
                                            f"or {_DEFAULT_SEED})")
    p.add_argument("--packets", type=int, help="packets per replication")
    p.add_argument("--replications", type=int, help="independent replications")
    p.add_argument("--warmup-fraction", dest="warmup_fraction", type=float,
                   help="fraction of departures discarded as warm-up")


def build_parser() -> _Parser:
    parser = _Parser(prog="sdnqueue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="balance solution, mean sojourn, stability verdict")
    _add_node_flags(p); _add_controller_flags(p); _add_output_flags(p)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("distribution", help="pdf/ccdf or quantile tables")
    _add_node_flags(p); _add_controller_flags(p); _add_output_flags(p)
    p.add_argument("--t-max", dest="t_max", type=float, help="table horizon (seconds)")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--quantiles", help="comma list of probabilities; emit quantile table")
    p.add_argument("--deadline-us", dest="deadline_us", type=float,
                   help="also print P(sojourn <= deadline)")
    p.set_defaults(fn=_cmd_distribution)

    p = sub.add_parser("simulate", help="discrete-event simulation of one node")
    _add_node_flags(p); _add_controller_flags(p); _add_sim_flags(p); _add_output_flags(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("chain", help="tandem chain sharing one controller")
    p.add_argument("--lam", help="comma list: external rate per node")
    p.add_argument("--q-nf", dest="q_nf", help="comma list: new-flow probability per node")
    p.add_argument("--mu-switch", dest="mu_switch", help="comma list (packets/s)")
    p.add_argument("--mu-switch-us", dest="mu_switch_us", help="comma list (microseconds)")
    _add_controller_flags(p)
    p.add_argument("--simulate", action="store_true", help="add DES columns")
    _add_sim_flags(p); _add_output_flags(p)
    p.set_defaults(fn=_cmd_chain)

    p = sub.add_parser("dimension", help="max admissible throughput for a delay bound")
    p.add_argument("--q-nf", dest="q_nf", type=float)
    p.add_argument("--mu-switch", dest="mu_switch", type=float)
    p.add_argument("--mu-switch-us", dest="mu_switch_us", type=float)
    _add_controller_flags(p)
    p.add_argument("--delay-bound-us", dest="delay_bound_us", type=float,
                   help="single delay bound (microseconds)")
    p.add_argument("--curve-points", dest="curve_points", type=int, default=40,
                   help="points of the default bound grid when no single bound given")
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_dimension)

    p = sub.add_parser("sweep", help="one-variable sweep from config/flags")
    _add_node_flags(p); _add_controller_flags(p); _add_sim_flags(p)
    p.add_argument("--variable", choices=SWEEP_VARIABLES)
    p.add_argument("--grid", help="comma list or start:stop:count[:log]")
    p.add_argument("--outputs", help=f"comma list from {SWEEP_OUTPUTS}")
    p.add_argument("--deadline", type=float, help="deadline for deadline_prob (seconds)")
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("figure", help="emit the data file behind one canned figure")
    p.add_argument("name", choices=_FIGURES)
    p.add_argument("--mu-switch", dest="mu_switch", type=float)
    p.add_argument("--mu-switch-us", dest="mu_switch_us", type=float, default=9.8)
    p.add_argument("--mu-controller", dest="mu_controller", type=float)
    p.add_argument("--mu-controller-us", dest="mu_controller_us", type=float, default=240.0)
    p.add_argument("--q-nf", dest="q_nf", type=float, default=0.5,
                   help="new-flow probability (fig2, fig5)")
    p.add_argument("--q-set", dest="q_set", help="comma list of q_nf values (fig4, fig6)")
    p.add_argument("--mu-c-us-set", dest="mu_c_us_set",
                   help="comma list of controller service times in us (fig5)")
    p.add_argument("--rho-grid", dest="rho_grid", default="0.1:0.9:9",
                   help="controller-load grid (fig2, fig3, fig5, fig6)")
    p.add_argument("--deadline-us", dest="deadline_us", type=float, default=500.0)
    p.add_argument("--points", type=int, default=40, help="delay-bound grid size (fig4)")
    p.add_argument("--seed", type=int)
    p.add_argument("--packets", type=int, default=200_000)
    p.add_argument("--replications", type=int, default=5)
    p.add_argument("--quick", action="store_true", help="small simulations (20k packets)")
    p.add_argument("--output", help="output file (default <name>.csv)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=_cmd_figure)

    p = sub.add_parser("validate", help="run the acceptance criteria")
    p.add_argument("--quick", action="store_true",
                   help="reduced packet counts, rescaled tolerances, < 30 s")
    p.add_argument("--criteria", help="comma list of criterion numbers (default all)")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UnstableSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())
