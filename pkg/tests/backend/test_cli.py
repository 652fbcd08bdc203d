"""
Tests for the wsatlab command line
Subcommands, output formats and exit codes
"""

import json

import pytest

from backend.cli import EXIT_BUDGET, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, build_parser, main
from backend.services.graph_core import parse_graph6


def run_json(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.integration
class TestSubcommands:
    """JSON on stdout for every subcommand"""

    def test_invariants(self, capsys):
        """K_9 minus a matching: beta 6, ell - 1 = 31"""
        code, data = run_json(capsys, ["invariants", "--pattern", "k9mm"])
        assert code == EXIT_OK
        assert data["beta"] == 6
        assert data["wsat_v"] == 31

    def test_invariants_g6(self, capsys):
        """--format g6 prints the pattern"""
        assert main(["--format", "g6", "invariants", "--pattern", "clique:4"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "C~"

    def test_closure(self, capsys):
        """A path percolates to K_4 under triangles"""
        code, data = run_json(capsys, ["closure", "--pattern", "clique:3", "--graph", "Ch"])
        assert code == EXIT_OK
        assert data["complete"] is True

    def test_check(self, capsys):
        """Weak saturation with a certificate; failures exit 1"""
        code, data = run_json(capsys, ["check", "--pattern", "clique:3", "--graph", "Ch"])
        assert code == EXIT_OK
        assert data["weakly_saturated"] is True
        code, data = run_json(capsys, ["check", "--pattern", "clique:3", "--graph", "C?"])
        assert code == EXIT_CHECK_FAILED
        assert data["weakly_saturated"] is False

    def test_bounds(self, capsys):
        """One report per n, plus the g*_r status on request"""
        code, data = run_json(
            capsys, ["bounds", "--pattern", "clique:4", "--n-min", "6", "--n-max", "8", "--r", "2"]
        )
        assert code == EXIT_OK
        assert [rep["n"] for rep in data["reports"]] == [6, 7, 8]
        assert data["reports"][0]["exact"] == {"val": 9, "src": "cor2"}
        assert data["bridges_status"]["property2"] is True

    def test_bounds_cf(self, capsys):
        """A certified c_F feeds the linear lower bound"""
        code, data = run_json(capsys, ["bounds", "--pattern", "clique:4", "--n", "7", "--cf", "2"])
        assert code == EXIT_OK
        lower = {rec["src"]: rec["val"] for rec in data["reports"][0]["lower"]}
        assert lower["claim1-cf"] == 11

    def test_construct(self, capsys):
        """Constructions report their claim and optional verification"""
        code, data = run_json(capsys, ["construct", "clique-witness", "--params", "4,6", "--verify"])
        assert code == EXIT_OK
        assert data["edges"] == 9
        assert data["verified"] is True

    def test_construct_g6(self, capsys):
        """--format g6 prints only the graph"""
        assert main(["--format", "g6", "construct", "generic", "--pattern", "clique:4", "--n", "6"]) == EXIT_OK
        assert parse_graph6(capsys.readouterr().out.strip()).edge_count == 9

    def test_solve(self, capsys):
        """wsat(6, K_4) = 9"""
        code, data = run_json(capsys, ["solve", "--pattern", "clique:4", "--n", "6"])
        assert code == EXIT_OK
        assert data["value"] == 9
        assert data["exact"] is True

    def test_solve_budget(self, capsys):
        """Exhausted budgets exit 3 with the bracket"""
        code, data = run_json(capsys, ["solve", "--pattern", "Cr", "--n", "5", "--budget-nodes", "0"])
        assert code == EXIT_BUDGET
        assert data["exact"] is False
        assert data["lower_bound"] == 4

    def test_verify(self, capsys):
        """Suites exit 0 when every check passes"""
        code, data = run_json(capsys, ["verify", "thm5"])
        assert code == EXIT_OK
        assert data["passed"] is True

    def test_induced_is_ignored(self, capsys):
        """--induced warns and proceeds"""
        code, data = run_json(capsys, ["--induced", "invariants", "--pattern", "clique:3"])
        assert code == EXIT_OK
        assert data["beta"] == 1


class TestUsage:
    """Exit code 2 for bad invocations"""

    def test_missing_subcommand(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_unknown_construction(self, capsys):
        assert main(["construct", "nonsense"]) == EXIT_USAGE

    def test_bad_pattern(self, capsys):
        """Malformed graph6 is a usage error"""
        assert main(["invariants", "--pattern", "not graph6!"]) == EXIT_USAGE

    def test_bad_params(self, capsys):
        assert main(["construct", "fvd", "--params", "5,x"]) == EXIT_USAGE

    def test_bad_range(self, capsys):
        assert main(["bounds", "--pattern", "clique:4", "--n-min", "8", "--n-max", "6"]) == EXIT_USAGE

    def test_bad_suite_option(self, capsys):
        """Options a suite does not take"""
        assert main(["verify", "thm7", "--seed", "3"]) == EXIT_USAGE

    def test_bad_log_level(self, capsys):
        assert main(["--log-level", "loud", "invariants", "--pattern", "clique:3"]) == EXIT_USAGE

    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("wsatlab ")

    def test_parser_lists_every_subcommand(self):
        parser = build_parser()
        args = parser.parse_args(["solve", "--pattern", "clique:3", "--n", "5"])
        assert args.command == "solve"
        assert args.canonical is False
