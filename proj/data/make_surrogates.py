#!/usr/bin/env python3
# Copyright 2026 The pega-tsp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Write stand-in instances with the sizes and formats of gr48, kroA100 and
kroB200. They are random and are NOT the TSPLIB instances; put the real files
in data/tsplib/ to use those instead."""

import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent / "surrogate"


def explicit_lower_diag(name, m, side, seed):
    rng = random.Random(seed)
    pts = [(rng.uniform(0, side), rng.uniform(0, side)) for _ in range(m)]
    lines = [f"NAME : {name}", f"COMMENT : random stand-in, {m} cities, not a TSPLIB instance",
             "TYPE : TSP", f"DIMENSION : {m}", "EDGE_WEIGHT_TYPE : EXPLICIT",
             "EDGE_WEIGHT_FORMAT : LOWER_DIAG_ROW", "EDGE_WEIGHT_SECTION"]
    for i in range(m):
        row = []
        for j in range(i + 1):
            d = 0 if i == j else max(1, int(math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]) + 0.5))
            row.append(str(d))
        lines.append(" ".join(row))
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def euc_2d(name, m, side, seed):
    rng = random.Random(seed)
    lines = [f"NAME : {name}", f"COMMENT : random stand-in, {m} cities, not a TSPLIB instance",
             "TYPE : TSP", f"DIMENSION : {m}", "EDGE_WEIGHT_TYPE : EUC_2D", "NODE_COORD_SECTION"]
    for i in range(m):
        lines.append(f"{i + 1} {rng.randint(0, side)} {rng.randint(0, side)}")
    lines.append("EOF")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    (OUT / "gr48-surrogate.tsp").write_text(explicit_lower_diag("gr48-surrogate", 48, 1000, 48))
    (OUT / "kroA100-surrogate.tsp").write_text(euc_2d("kroA100-surrogate", 100, 4000, 100))
    (OUT / "kroB200-surrogate.tsp").write_text(euc_2d("kroB200-surrogate", 200, 4000, 200))
