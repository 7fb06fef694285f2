import json
import logging

import pytest

from app import cli

from tests.conftest import problem_path


def test_reports_are_identical_across_runs(run_cli):
    outputs = [run_cli("checksat", problem_path("a1_c1.loc")) for _ in range(3)]
    assert len(set(outputs)) == 1
    code, out = outputs[0]
    assert code == 0
    assert out.startswith("soqe-kit report v1\ncommand: checksat\n")
    assert "verdict: unsat\n" in out
    assert "theory: Tu\n" in out


def test_satisfiable_query_prints_a_model(run_cli):
    code, out = run_cli("checksat", problem_path("ranges.loc"))
    assert code == 0
    assert "verdict: sat\n" in out
    assert "model:\n" in out


def test_constraint_on_ranges(run_cli):
    code, out = run_cli("constrain", problem_path("ranges.loc"))
    assert code == 0
    assert "parameters: r1 r2\n" in out
    assert "constraint: forall u. r1(u) - r2(u) <= 0\n" in out
    assert "listing: (FORALL u). r1(u) - r2(u) <= _0\n" in out
    assert "regime: sound, weakest-modulo-model-completion\n" in out
    assert "verified: yes\n" in out


def test_single_point_domain_needs_no_constraint(run_cli):
    code, out = run_cli("constrain", problem_path("ranges.loc"), "--psort-card", "1")
    assert code == 0
    assert "regime: weakest\n" in out
    assert "verified: yes\n" in out


def test_saturation_with_closure_axioms(run_cli):
    code, out = run_cli("saturate", problem_path("graph_closed.loc"))
    assert code == 0
    assert "saturated: 4 clauses\n" in out
    assert "pi(u, v) & pe(u, v) || _|_\n" in out


def test_saturation_without_axioms_diverges(run_cli):
    code, out = run_cli("saturate", problem_path("graph.loc"), "--max-clauses", "12")
    assert code == 2
    assert "diverged: clause limit after " in out
    assert "hint: the emit-chc command" in out


def test_empty_clause_set_is_saturated(run_cli):
    code, out = run_cli("saturate", problem_path("empty.loc"))
    assert code == 0
    assert "saturated: 0 clauses\n" in out


def test_eliminating_edges(run_cli):
    code, out = run_cli("eliminate", problem_path("graph_closed.loc"), "E")
    assert code == 0
    assert "eliminated: E\n" in out
    assert "remaining: 1 clauses\n" in out
    assert "consistent on 2 points: " in out


def test_eliminating_an_undeclared_predicate(run_cli):
    code, out = run_cli("eliminate", problem_path("graph_closed.loc"), "F")
    assert code == 1
    assert "error: UsageError: undeclared predicates: F\n" in out


def test_horn_clause_export(run_cli):
    code, out = run_cli("emit-chc", problem_path("reach.loc"), "P")
    assert code == 0
    assert "clause parts: 4\n" in out
    assert "rules: 7\n" in out
    assert "query: mu_4\n" in out
    assert "  (set-logic HORN)\n" in out
    assert "  (check-sat)\n" in out


def test_horn_clauses_handed_to_a_solver(run_cli):
    solver = f"cat {problem_path('sat_model.txt')}"
    code, out = run_cli("emit-chc", problem_path("reach.loc"), "P", "--solve-chc", solver)
    assert code == 0
    assert "solver: satisfiable\n" in out
    assert "verdict: the structure satisfies exists P. N\n" in out
    assert "  mu_1(x, y) = (<= x y)\n" in out


def test_acceleration(run_cli):
    code, out = run_cli("accelerate", problem_path("reach.loc"), "P")
    assert code == 0
    assert "accelerated: 4 clauses\n" in out
    assert "criterion: " in out


def test_class_included_in_itself(run_cli):
    code, out = run_cli("inclusion", problem_path("classes.loc"), "A", "A")
    assert code == 0
    assert "verdict: holds\n" in out
    assert "pruned: " in out


def test_unknown_class_is_a_parse_error(run_cli):
    code, out = run_cli("inclusion", problem_path("classes.loc"), "A", "C")
    assert code == 1
    assert "error: ParseError: class 'C' is not defined" in out


@pytest.mark.parametrize("command, name, message", [
    ("saturate", "ranges.loc", "saturate needs a Clauses section"),
    ("inclusion", "ranges.loc", "inclusion needs a Classes section"),
    ("constrain", "graph.loc", "constrain needs a Query section unless --ensure-valid is given"),
])
def test_missing_sections(run_cli, command, name, message):
    code, out = run_cli(command, problem_path(name))
    assert code == 1
    assert f"error: UsageError: {message}\n" in out


def test_parse_errors_exit_with_one(run_cli, tmp_path):
    broken = tmp_path / "broken.loc"
    broken.write_text("Query := a = b;\nClauses := a = b;\n", encoding="utf-8")
    code, out = run_cli("checksat", broken)
    assert code == 1
    assert "error: ParseError: section Clauses is out of order" in out


def test_unreadable_problem_file(run_cli, tmp_path):
    code, out = run_cli("checksat", tmp_path / "missing.loc")
    assert code == 1
    assert "error: UsageError: cannot read " in out


def test_json_mirror(run_cli):
    code, out = run_cli("constrain", problem_path("ranges.loc"), "--json")
    assert code == 0
    mirror = json.loads(out)
    assert set(mirror) == {"verdict", "clauses", "constraint", "trace_path", "timings"}
    assert mirror["verdict"] == "constrained"
    assert mirror["constraint"] == "forall u. r1(u) - r2(u) <= 0"
    assert set(mirror["timings"]) == {"eliminate", "verify"}


def test_trace_file(run_cli, tmp_path):
    trace = tmp_path / "trace.txt"
    code, out = run_cli("saturate", problem_path("graph_closed.loc"), "--trace", trace)
    assert code == 0
    assert out.endswith(f"trace: {trace}\n")
    lines = trace.read_text(encoding="utf-8").splitlines()
    kept = [line for line in lines if not line.startswith("- ")]
    assert len(kept) == 1
    assert kept[0].startswith("4 resolution 1,3 ")
    assert any(line.endswith("(smaller by conjunct count)") for line in lines if line.startswith("- "))


def test_limits_from_config_file(run_cli, tmp_path):
    config = tmp_path / "soqe.conf"
    config.write_text("# tight budget\nmax_clauses = 12\n", encoding="utf-8")
    code, out = run_cli("saturate", problem_path("graph.loc"), "--config", config)
    assert code == 2
    assert "diverged: clause limit" in out


def test_broken_config_file(tmp_path, capsys):
    config = tmp_path / "soqe.conf"
    config.write_text("colour = blue\n", encoding="utf-8")
    code = cli.main(["checksat", str(problem_path("a1_c1.loc")), "--config", str(config)])
    captured = capsys.readouterr()
    logging.getLogger().handlers.clear()
    assert code == 1
    assert captured.out == ""
    assert "soqe-kit: " in captured.err
    assert "unknown setting 'colour'" in captured.err
