from zsf.cli.models import BudgetUsage, OutputFormat, Report
from zsf.core.models import Budget


def make_report(**kwargs) -> Report:
    return Report(version="0.0.0", command="test", **kwargs)


def test_json_text_is_sorted():
    text = make_report(results={"b": 1, "a": 2}).render(OutputFormat.JSON)
    assert text.index('"a"') < text.index('"b"')
    assert '"schema_version": 1' in text


def test_csv_flattens_nested_values():
    rows = make_report(
        results={"a": {"b": [1, 2]}, "n": None, "flag": True}
    ).to_csv().splitlines()
    assert rows[0] == "key,value"
    assert 'results.a.b,"[1, 2]"' in rows
    assert "results.n," in rows
    assert "results.flag,true" in rows
    assert "exit_code,0" in rows


def test_budget_usage():
    budget = Budget(max_nodes=10, max_results=5)
    usage = BudgetUsage.from_budget(budget)
    assert usage.model_dump() == {"max_nodes": 10, "max_results": 5, "nodes_used": 0}
