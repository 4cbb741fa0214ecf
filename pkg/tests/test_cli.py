import io
import json
import subprocess
import sys

import pytest

from qmzv.bibracket import BiBracketIndex
from qmzv.cli import RunConfig, main, parse_range, parse_target
from qmzv.errors import ParseError
from qmzv.linalg import TruncationTooSmall
from qmzv.reports import MATCH, TableReport


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


class TestParsing:
    def test_index_forms(self):
        assert parse_target("[2|0]") == BiBracketIndex.bracket(2)
        assert parse_target(" [1, 2 | 0, 3] ") == BiBracketIndex((1, 2), (0, 3))
        assert parse_target("[1,1]") == BiBracketIndex.bracket(1, 1)
        assert parse_target("[|]") == BiBracketIndex()

    def test_models(self):
        spec = parse_target("SZ:2,1")
        assert spec.s == (2, 1)

    @pytest.mark.parametrize(
        "text,position",
        [("[1,x|0,0]", 3), ("[1,2|0]", 4), ("[1|0", 4), ("zz:1", 0), ("[1|0|0]", 4), ("2,1", 0)],
    )
    def test_errors_report_position(self, text, position):
        with pytest.raises(ParseError) as info:
            parse_target(text)
        assert info.value.position == position

    def test_ranges(self):
        assert parse_range("4..7") == [4, 5, 6, 7]
        assert parse_range("1,3") == [1, 3]
        with pytest.raises(ParseError):
            parse_range("a..b")

    def test_run_config(self):
        with pytest.raises(ValueError):
            RunConfig(threads=0)
        with pytest.raises(ValueError):
            RunConfig(primes=(7, 7))


class TestExpand:
    def test_sigma(self):
        assert run("expand", "[2|0]", "--n", "6") == (0, "0, 1, 3, 4, 7, 6, 12\n")

    def test_empty(self):
        code, text = run("expand", "[|]")
        assert code == 0 and text.split(", ")[0] == "1"
        assert run("expand", "[|]", "--n", "0") == (0, "1\n")

    def test_model(self):
        assert run("expand", "sz:1", "--n", "4") == (0, "0, 1, 2, 2, 3\n")

    def test_rational_and_prime(self):
        _, exact = run("expand", "[1|1]", "--n", "5")
        _, modp = run("expand", "[1|1]", "--n", "5", "--prime", "2147483647")
        assert exact == modp == "0, 1, 3, 4, 7, 6\n"

    def test_formats(self):
        code, text = run("expand", "[2]", "--n", "3", "--format", "json")
        assert json.loads(text)["coefficients"] == ["0", "1", "3", "4"]
        assert run("expand", "[2]", "--n", "1", "--format", "csv")[1] == "n,coefficient\n0,0\n1,1\n"
        assert run("expand", "[2]", "--n", "1", "--format", "markdown")[1].startswith("| n | coefficient |")

    def test_parse_error_exit(self, capsys):
        assert run("expand", "[1,2|0]")[0] == 2
        assert "position" in capsys.readouterr().err


class TestTable:
    def test_fil_row_four(self):
        code, text = run("table", "fil", "--max-weight", "4", "--max-depth", "4", "--format", "json")
        assert code == 0
        report = TableReport.from_json(text)
        assert report.table.row(4) == [7, 12, 14, 15]
        assert all(s == MATCH for _, _, s in report.comparison().values())
        assert report.config["N_rule"] == "auto"

    def test_json_round_trip(self, tmp_path):
        _, text = run("table", "gr", "--max-weight", "5", "--format", "json")
        path = tmp_path / "gr.json"
        path.write_text(text)
        again = TableReport.from_json(path.read_text())
        assert again.to_json() == text.rstrip("\n")
        assert again == TableReport.from_json(text)

    def test_generators(self):
        code, text = run("table", "generators", "--max-weight", "8", "--format", "json")
        report = TableReport.from_json(text)
        assert code == 0
        assert (report.table[(8, 2)], report.table[(7, 3)], report.table[(3, 1)]) == (7, 3, 2)

    def test_threads_do_not_change_output(self):
        a = TableReport.from_json(run("table", "fil", "--max-weight", "5", "--format", "json")[1])
        b = TableReport.from_json(run("table", "fil", "--max-weight", "5", "--threads", "4", "--format", "json")[1])
        assert a.table == b.table

    def test_text_and_csv(self):
        code, text = run("table", "fil", "--max-weight", "3")
        assert code == 0 and "cells:" in text
        csv_text = run("table", "fil", "--max-weight", "3", "--format", "csv")[1]
        assert csv_text.splitlines()[0].startswith("k,l,")

    def test_small_truncation_is_flagged(self):
        with pytest.warns(TruncationTooSmall):
            code, text = run("table", "fil", "--max-weight", "5", "--n", "10")
        assert code == 1 and "lower-than-expected" in text

    def test_cache_dir(self, tmp_path):
        run("table", "fil", "--max-weight", "4", "--cache-dir", str(tmp_path))
        assert list(tmp_path.glob("*.qbbk"))

    def test_markdown_layout(self):
        text = run("table", "fil", "--max-weight", "2", "--format", "markdown")[1]
        lines = text.strip().splitlines()
        assert lines[0].replace(" ", "").startswith("|k\\l|")
        assert "| 2 | 1 | 3 | 4 |" in text


class TestPsdim:
    def test_row_two(self):
        assert run("psdim", "--l", "2", "--k", "4..10") == (0, "l=2: 1, 0, 2, 0, 8, 0, 14\n")

    def test_row_one(self):
        assert run("psdim", "--l", "1", "--k", "1..6") == (0, "l=1: 1, 1, 2, 2, 3, 3\n")

    def test_row_three(self):
        assert run("psdim", "--l", "3", "--k", "3..5") == (0, "l=3: 0, 0, 1\n")

    def test_json(self):
        code, text = run("psdim", "--l", "2", "--k", "4..6", "--format", "json")
        assert code == 0 and json.loads(text)["kind"] == "psdim"


class TestCheck:
    def test_msq(self):
        code, text = run("check", "msq", "--k", "60")
        assert code == 0 and text.startswith("msq: pass")

    def test_json(self):
        code, text = run("check", "y1-bk", "--k", "20", "--format", "json")
        assert code == 0 and json.loads(text)["passed"] is True

    def test_unknown_name(self, capsys):
        assert run("check", "nonsense")[0] == 2
        assert "unknown check" in capsys.readouterr().err

    def test_usage_error(self):
        assert run("table", "nope")[0] == 2
        assert run("table", "fil", "--threads", "0")[0] == 2


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "qmzv.cli", "expand", "[3]", "--n", "3"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and proc.stdout == "0, 1/2, 5/2, 5\n"
