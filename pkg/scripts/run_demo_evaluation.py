#!/usr/bin/env python3
"""End-to-end offline demo: ingest a tiny corpus, repair it, compute metrics.

The provider here is a deterministic field patcher that resolves exactly one
reported misconfiguration per call, so the run exercises multi-step repair
and yields non-trivial step curves.  No network, no external tools.

Usage: python scripts/run_demo_evaluation.py [--workdir demo_output]
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import shutil
import sys
from pathlib import Path

from kubesecfix.cli import RunConfig, replay_run, run_evaluation
from kubesecfix.context import ContextRetriever, build_policy_index, index_mapping
from kubesecfix.ingest import PackageRef, dataset_stats, split_and_filter, write_corpus_manifest
from kubesecfix.policy import PolicyEngine, register_builtin_checks
from kubesecfix.policy.builtin import builtin_policy_root
from kubesecfix.repair import RepairPolicy

DEMO_CHECKS = frozenset({"CKV_K8S_16", "CKV_K8S_17", "CKV_K8S_20"})

RENDERED_MANIFESTS = {
    "storefront": """\
apiVersion: v1
kind: Pod
metadata:
  name: storefront
spec:
  containers:
  - name: storefront
    image: example/storefront:2.0
    securityContext:
      allowPrivilegeEscalation: true
      privileged: true
---
apiVersion: v1
kind: Service
metadata:
  name: storefront
spec:
  ports:
  - port: 443
""",
    "metrics-agent": """\
apiVersion: apps/v1
kind: DaemonSet
metadata:
  name: metrics-agent
spec:
  selector:
    matchLabels:
      app: metrics-agent
  template:
    metadata:
      labels:
        app: metrics-agent
    spec:
      hostPID: true
      containers:
      - name: agent
        image: example/agent:1.4
        securityContext:
          allowPrivilegeEscalation: true
""",
}

FIRST_FENCE = re.compile(r"```yaml\n(.*?)```", re.DOTALL)

PATCHES = [
    ("allowPrivilegeEscalation: true", "allowPrivilegeEscalation: false"),
    ("privileged: true", "privileged: false"),
    ("hostPID: true", "hostPID: false"),
]


class OneFixPerCallProvider:
    """Rewrites the first misconfigured field it finds in the prompted config."""

    identity = "demo-field-patcher"

    def generate(self, prompt: str, temperature: float) -> str:
        match = FIRST_FENCE.search(prompt)
        config = match.group(1) if match else prompt
        for bad, good in PATCHES:
            if bad in config:
                config = config.replace(bad, good, 1)
                break
        return f"```yaml\n{config}```"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="demo_output", help="where to put corpus and runs")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    workdir = Path(args.workdir)
    if workdir.exists():
        shutil.rmtree(workdir)
    rendered_dir = workdir / "rendered"
    rendered_dir.mkdir(parents=True)

    rendered = []
    for rank, (name, text) in enumerate(RENDERED_MANIFESTS.items(), start=1):
        path = rendered_dir / f"{name}.rendered.yaml"
        path.write_text(text)
        rendered.append((PackageRef(name, "demo", "1.0.0", rank), path))

    engine = PolicyEngine(register_builtin_checks())
    corpus_dir = workdir / "corpus"
    entries = split_and_filter(rendered, engine, corpus_dir, check_filter=DEMO_CHECKS)
    write_corpus_manifest(entries, corpus_dir / "manifest.jsonl")
    print(f"corpus: {len(entries)} misconfigured unit(s)")
    print(f"issue distribution: {json.dumps(dataset_stats(entries))}")

    index = index_mapping(build_policy_index(builtin_policy_root()))
    retriever = ContextRetriever(index=index, cache=None)
    cfg = RunConfig(
        policy=RepairPolicy(check_filter=DEMO_CHECKS),
        run_id="demo",
        runs_dir=str(workdir / "runs"),
        cache_dir=str(workdir / "cache"),
        offline=True,
    )

    run_dir = workdir / "runs" / "demo"
    summary = run_evaluation(cfg, entries, engine, retriever, OneFixPerCallProvider(), run_dir)
    print()
    print(summary.table_header())
    print(summary.table_row())

    replayed = replay_run(run_dir)
    print()
    print("replay matches live run:", replayed.to_json() == summary.to_json())
    print(f"artifacts under {run_dir}/ (metrics.json, pr_over_steps.csv, *.log.jsonl)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
