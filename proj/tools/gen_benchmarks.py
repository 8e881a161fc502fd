#!/usr/bin/env python3
# Copyright 2026 The alignmon Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled benchmark chains to data/benchmarks/*.tra.

die is the Knuth-Yao dice model with the usual PRISM state ordering. The
others are small hand-built stand-ins that keep the flavour of the PRISM
models of the same name (lossy channels, random forwarding, leader election
rounds, faulty NAND stages) at a few dozen to a few hundred states.
"""

import argparse
import math
import pathlib
from collections import OrderedDict

LICENSE = """\
# Copyright 2026 The alignmon Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""


class Builder:
    def __init__(self):
        self.index = OrderedDict()
        self.rows = {}

    def state(self, key):
        if key not in self.index:
            self.index[key] = len(self.index)
        return self.index[key]

    def add(self, src, dst, p):
        if p <= 0.0:
            return
        s, d = self.state(src), self.state(dst)
        row = self.rows.setdefault(s, {})
        row[d] = row.get(d, 0.0) + p

    def explore(self, init, succ):
        todo = [init]
        self.state(init)
        seen = {init}
        while todo:
            s = todo.pop(0)
            for t, p in succ(s):
                self.add(s, t, p)
                if t not in seen:
                    seen.add(t)
                    todo.append(t)

    def text(self, comment):
        n = len(self.index)
        lines = []
        for s in range(n):
            row = self.rows.get(s)
            if not row:
                raise ValueError(f"state {s} has no successors")
            total = sum(row.values())
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"row {s} sums to {total}")
            for d in sorted(row):
                lines.append(f"{s} {d} {row[d]!r}")
        return LICENSE + f"# {comment}\n{n} {len(lines)}\n" + "\n".join(lines) + "\n"


def die():
    b = Builder()
    for s in range(13):
        b.state(s)
    for s, (x, y) in {0: (1, 2), 1: (3, 4), 2: (5, 6), 3: (1, 7), 4: (8, 9),
                      5: (10, 11), 6: (2, 12)}.items():
        b.add(s, x, 0.5)
        b.add(s, y, 0.5)
    for s in range(7, 13):
        b.add(s, s, 1.0)
    return b.text("Knuth-Yao die: 0-6 coin states, 7-12 outcomes 1-6")


def brp(chunks=16, max_retries=2, p_frame=0.98, p_ack=0.99):
    def succ(s):
        if s in ("done", "fail"):
            return [(s, 1.0)]
        i, r, phase = s
        retry = (i, r + 1, "send") if r < max_retries else "fail"
        if phase == "send":
            return [((i, r, "acked"), p_frame), (retry, 1.0 - p_frame)]
        nxt = (i + 1, 0, "send") if i + 1 < chunks else "done"
        return [(nxt, p_ack), (retry, 1.0 - p_ack)]

    b = Builder()
    b.explore((0, 0, "send"), succ)
    return b.text(f"bounded retransmission stand-in: {chunks} chunks, {max_retries} retries")


def crowds(members=4, runs=3, corrupt=1, p_forward=0.8, max_hops=4):
    # The message holder is tracked per member together with a capped hop
    # count; a corrupt member observes its predecessor and ends the run.
    total = members + corrupt

    def succ(s):
        if s[0] == "end":
            return [(s, 1.0)]
        run, holder, hops, seen = s

        def finish(obs):
            return ("end", obs) if run + 1 == runs else (run + 1, "sender", 0, obs)

        out = []
        pick = 1.0 / total if holder == "sender" else p_forward / total
        nh = min(hops + 1, max_hops)
        for m in range(members):
            out.append(((run, m, nh, seen), pick))
        out.append((finish(seen + (1 if holder == "sender" else 0)), pick * corrupt))
        if holder != "sender":
            out.append((finish(seen), 1.0 - p_forward))
        return out

    b = Builder()
    b.explore((0, "sender", 0, 0), succ)
    return b.text(f"crowds stand-in: {members} honest members, {runs} runs")


def leader(procs=3, values=5):
    # Processes draw in turn; the round is kept as the tuple of draws.
    def succ(s):
        if s[0] == "elected":
            return [(s, 1.0)]
        draws = s[1]
        if len(draws) == procs:
            top = max(draws)
            if draws.count(top) == 1:
                return [(("elected", draws.index(top)), 1.0)]
            return [(("round", ()), 1.0)]
        return [(("round", draws + (v,)), 1.0 / values) for v in range(1, values + 1)]

    b = Builder()
    b.explore(("round", ()), succ)
    return b.text(f"leader election stand-in: {procs} processes, {values} values")


def nand(n=5, stages=2, perr=0.02, prob1=0.9):
    def binom(k):
        return math.comb(n, k) * prob1 ** k * (1.0 - prob1) ** (n - k)

    def succ(s):
        if s == "init":
            return [((0, 0, 0, k), binom(k)) for k in range(n + 1)]
        if s[0] == "out":
            return [(s, 1.0)]
        stage, u, ones, prev = s
        if u == n:
            return [(("out", ones), 1.0)] if stage + 1 == stages else [((stage + 1, 0, 0, ones), 1.0)]
        f = prev / n
        p1 = (1.0 - perr) * (1.0 - f * f) + perr * f * f
        return [((stage, u + 1, ones + 1, prev), p1), ((stage, u + 1, ones, prev), 1.0 - p1)]

    b = Builder()
    b.explore("init", succ)
    return b.text(f"nand multiplexing stand-in: bundle {n}, {stages} stages, perr {perr}")


CHAINS = {
    "die": die,
    "brp-16-2": brp,
    "crowds-4-3": crowds,
    "leader-3-5": leader,
    "nand-5-2": nand,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "benchmarks"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, make in CHAINS.items():
        (out / f"{name}.tra").write_text(make())


if __name__ == "__main__":
    main()
