#!/usr/bin/env python3
"""End-to-end checks of the eprmux command line: exit codes, determinism,
exports and the fit/simulate round trip."""

import json
import pathlib
import subprocess
import sys
import tempfile

CLI = sys.argv[1]
ROOT = pathlib.Path(sys.argv[2])
CONFIGS = ROOT / "configs"
failures = []


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True)


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + ("" if cond else f": {detail}"))
    if not cond:
        failures.append(name)


def report(*args):
    out = run(*args)
    if out.returncode != 0:
        raise SystemExit(f"{args} exited {out.returncode}: {out.stderr.decode()}")
    return json.loads(out.stdout)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)

        # simulate
        r = report("simulate", CONFIGS / "vacuum.config")["report"]
        check("vacuum config gives I = E = 1",
              abs(r["I_insep"] - 1) < 1e-9 and abs(r["E_epr"] - 1) < 1e-9, r)
        check("vacuum config is not entangled", not r["inseparable"] and not r["epr_paradox"], r)
        r = report("simulate", CONFIGS / "paper-n1.config")["report"]
        check("bundled fitted config gives 0.41 / 0.64",
              abs(r["I_insep"] - 0.41) < 1e-3 and abs(r["E_epr"] - 0.64) < 1e-3, r)
        a, b = run("simulate", CONFIGS / "reference-fbs.config"), run("simulate", CONFIGS / "reference-fbs.config")
        check("simulate is byte-stable", a.stdout == b.stdout and a.returncode == 0)

        bad = tmp / "bad.config"
        bad.write_text('{"source": {"pump": 0.5}}')
        out_path = tmp / "should_not_exist.json"
        p = run("simulate", bad, "--out", out_path)
        check("unknown key exits 2", p.returncode == 2, p.returncode)
        check("malformed config writes nothing", not out_path.exists() and p.stdout == b"")
        broken = tmp / "broken.config"
        broken.write_text('{"source": ')
        p = run("simulate", broken)
        check("unparsable config exits 2 with no stdout", p.returncode == 2 and p.stdout == b"",
              p.returncode)
        check("missing config exits 2", run("simulate", tmp / "nope.config").returncode == 2)
        hot = tmp / "hot.config"
        hot.write_text('{"source": {"pump_parameter": 1.2}}')
        p = run("simulate", hot)
        check("pump above threshold exits 3", p.returncode == 3, p.returncode)
        check("exit 3 carries a diagnostic", b"threshold" in p.stderr, p.stderr)

        out_path = tmp / "report.json"
        p = run("simulate", CONFIGS / "vacuum.config", "--out", out_path)
        check("--out writes the report, not stdout",
              p.returncode == 0 and p.stdout == b"" and json.loads(out_path.read_text())["report"])
        p = run("simulate", CONFIGS / "vacuum.config", "--format", "csv")
        check("csv report", p.returncode == 0 and b"I_insep," in p.stdout, p.stdout[:200])
        t = report("simulate", CONFIGS / "vacuum.config", "--timing")
        check("--timing adds wall time", "wall_time_s" in t)
        check("wall time absent by default",
              "wall_time_s" not in report("simulate", CONFIGS / "vacuum.config"))

        # plan
        n = report("plan", "--band", "4e6:10e6", "--detbw", "5e5")
        check("plan 4-10 MHz, B = 0.5 MHz has N = 6", n["plan"]["N"] == 6, n["plan"]["N"])
        n = report("plan", "--band", "6.6e6:7.4e6", "--detbw", "4e5")
        check("plan 6.6-7.4 MHz, B = 0.4 MHz has N = 1",
              n["plan"]["N"] == 1 and abs(n["plan"]["channels"][0]["center"] - 7e6) < 1e-3)
        p = run("plan", "--band", "5e6:5e6", "--detbw", "5e5")
        check("empty band exits 0 with N = 0",
              p.returncode == 0 and json.loads(p.stdout)["plan"]["N"] == 0, p.returncode)
        p = run("plan", "--band", "4e6:10e6", "--detbw", "5e5", "--demod", "6e5")
        check("demod >= B exits 3", p.returncode == 3, p.returncode)
        p = run("plan", "--band", "4e6-10e6", "--detbw", "5e5")
        check("malformed band exits 2", p.returncode == 2, p.returncode)
        v = report("plan", "--band", "4e6:10e6", "--detbw", "5e5", "--validate")
        chans = v["plan"]["channels"]
        check("validated plan reports every channel", all("report" in c for c in chans))
        check("validated plan: zero cross-channel covariance",
              v["plan"]["max_cross_channel_covariance"] < 1e-12)
        p = run("plan", "--band", "4e6:10e6", "--detbw", "5e5", "--format", "csv")
        check("csv plan has one row per channel", p.stdout.decode().strip().count("\n") == 6, p.stdout)

        # montecarlo
        mc = ["montecarlo", CONFIGS / "paper-n1.config", "--duration", "0.2", "--trials", "2"]
        a, b = run(*mc, "--seed", "5"), run(*mc, "--seed", "5")
        check("montecarlo fixed seed is byte-identical", a.returncode == 0 and a.stdout == b.stdout)
        c = run(*mc, "--seed", "6")
        check("montecarlo seed flag changes the draw", c.stdout != a.stdout)
        seeds = [t["seed"] for t in json.loads(a.stdout)["montecarlo"]["runs"]]
        check("trial seeds are base + k", seeds == [5, 6], seeds)

        rec, streams = tmp / "records", tmp / "streams"
        p = run("montecarlo", CONFIGS / "paper-n1.config", "--duration", "0.1", "--seed", "3",
                "--export-records", rec, "--export-streams", streams)
        check("montecarlo export exits 0", p.returncode == 0, p.stderr)
        raws = sorted(rec.glob("*.raw"))
        check("six raw records per trial", len(raws) == 6, [r.name for r in raws])
        consistent = True
        for f in raws:
            data = f.read_bytes()
            header, _, body = data.partition(b"\n")
            fields = dict(kv.split("=", 1) for kv in header.decode().split()[1:])
            consistent &= header.startswith(b"eprmux-raw ") and len(body) == 8 * int(fields["length"])
            consistent &= float(fields["sample_rate"]) == 2e6
        check("raw headers match file sizes", consistent)
        csvs = sorted(streams.glob("*.csv"))
        check("stream csv written", len(csvs) == 1 and csvs[0].read_text().startswith("t,"),
              [c.name for c in csvs])

        # fit
        fitted = tmp / "fit.config"
        p = run("fit", "--target-i", "0.41", "--target-e", "0.64", "--out", fitted)
        check("fit 0.41 / 0.64 exits 0", p.returncode == 0, p.stderr)
        r = report("simulate", fitted)["report"]
        check("fit round trip within 1e-3",
              abs(r["I_insep"] - 0.41) < 1e-3 and abs(r["E_epr"] - 0.64) < 1e-3, r)
        vac = json.loads(run("fit", "--target-i", "1", "--target-e", "1").stdout)
        check("fit 1 / 1 gives the vacuum", vac["source"]["pump_parameter"] == 0.0, vac["source"])
        for ti, te in [("0.2", "10"), ("0.2", "1.5")]:
            p = run("fit", "--target-i", ti, "--target-e", te)
            check(f"fit {ti} / {te} exits 3 with a diagnostic",
                  p.returncode == 3 and b"closest reachable" in p.stderr and p.stdout == b"",
                  (p.returncode, p.stderr))
        p = run("fit", "--target-i", "-1", "--target-e", "0.5")
        check("non-positive fit target exits 2", p.returncode == 2, p.returncode)

        for ti, te in [(0.3, 0.3), (0.5, 0.6), (0.7, 0.9), (0.9, 0.95), (0.6, 0.5)]:
            out = tmp / f"grid_{ti}_{te}.config"
            p = run("fit", "--target-i", ti, "--target-e", te, "--out", out)
            if p.returncode == 3:
                check(f"fit {ti} / {te} infeasible (exit 3)", True)
                continue
            r = report("simulate", out)["report"]
            check(f"fit {ti} / {te} round trip",
                  abs(r["I_insep"] - ti) < 1e-3 and abs(r["E_epr"] - te) < 1e-3, r)

        p = run("frobnicate")
        check("unknown subcommand exits 2", p.returncode == 2, p.returncode)

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
