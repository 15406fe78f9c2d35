"""Rebuild the golden files from the current CLI.

    python3 tests/golden/regenerate.py

The Figure-3 table and the figure-8 package are also checked against
independent values in the tests, so regenerating cannot silently hide a
regression in those numbers.
"""

import contextlib
import io
import json
import pathlib

import numpy as np

from isinglab.cli import main
from isinglab.graphs import emit_graph, random_bounded_graph
from isinglab.gadgets import FIGURE8_TEXT

HERE = pathlib.Path(__file__).parent
CORPUS = HERE / "cert_corpus"
CERT_BETAS = {3: "1.2,0.2", 4: "1.1,0.1", 5: "1.05,-0.08"}


def run(argv) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    assert code == 0, (argv, code)
    return buf.getvalue()


def corpus_graphs():
    rng = np.random.default_rng(2024)
    out = []
    for i in range(20):
        Delta = 3 + i % 3
        G = random_bounded_graph(int(rng.integers(4, 11)), Delta, rng)
        out.append((f"g{i:02d}_D{Delta}", Delta, G))
    return out


def main_():
    (HERE / "fig3_table.csv").write_text(run(["region", "table", "--format", "csv"]))
    fig8 = HERE / "figure8.txt"
    fig8.write_text(FIGURE8_TEXT)
    (HERE / "figure8_zeros.json").write_text(run(["find-zeros", "--graph", str(fig8)]))
    (HERE / "figure8_exact.json").write_text(
        run(["exact", "--graph", str(fig8), "--beta", "0.3966082527,0.9179879595"]))
    CORPUS.mkdir(exist_ok=True)
    index = []
    for name, Delta, G in corpus_graphs():
        path = CORPUS / f"{name}.txt"
        path.write_text(emit_graph(G))
        beta = CERT_BETAS[Delta]
        rep = json.loads(run(["certify", "--graph", str(path), "--beta", beta, "--delta", str(Delta)]))
        index.append({"graph": path.name, "Delta": Delta, "beta": beta, "report": rep})
    (CORPUS / "expected.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main_()
