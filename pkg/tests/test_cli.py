"""
命令行测试
通过 main(argv) 驱动各子命令，检查标准输出报告、附属文件与退出码
"""
import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rankforge.cli import main as cli
from rankforge.cli.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, load_config, main
from rankforge.cli.reports import emit_report, payload_hash, render_csv, render_json
from rankforge.config import BudgetConfig, reset_config_center
from rankforge.core.exceptions import ErrorCode

PHI_2_2_4 = ["--kind", "phi", "--q", "2", "--m", "2", "--n", "4", "--t", "1"]
TWISTED_3_3_3 = ["--kind", "twisted", "--q", "3", "--m", "3", "--n", "3", "--t", "1", "--s", "2"]


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    """每个用例使用空工作目录与干净的配置中心"""
    for key in list(os.environ):
        if key.startswith("RANKFORGE_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)
    reset_config_center()
    yield
    reset_config_center()


def run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr().out
    return status, out


class TestFieldCommand:
    """field 子命令"""

    def test_describe_field(self, capsys):
        status, out = run(capsys, "field", "--p", "2", "--E", "4")
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["order"] == 16
        assert set(data["subfields"]) == {"1", "2", "4"}

    def test_non_prime(self, capsys):
        status, _ = run(capsys, "field", "--p", "4", "--E", "2")
        assert status == EXIT_USAGE

    def test_reducible_modulus(self, capsys):
        status, _ = run(capsys, "field", "--p", "2", "--E", "2", "--modulus", "1", "0", "1")
        assert status == EXIT_USAGE


class TestCodeCommands:
    """code 子命令"""

    def test_build(self, capsys):
        status, out = run(capsys, "code", "build", *PHI_2_2_4)
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["kind"] == "phi"
        assert data["dimension"] == len(data["generators"])

    def test_mindist(self, capsys):
        status, out = run(capsys, "code", "mindist", *PHI_2_2_4)
        assert status == EXIT_OK
        assert json.loads(out)["min_distance"] == 2

    def test_verify_mrd(self, capsys):
        status, out = run(capsys, "code", "verify-mrd", *TWISTED_3_3_3)
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["is_mrd"] is True
        assert data["size"] == 27
        assert data["min_distance"] == 3

    def test_verification_failure_exit_code(self, capsys, monkeypatch):
        """报告照常输出，退出码为 1"""
        monkeypatch.setattr(cli, "verify_mrd", lambda *a, **k: {"is_mrd": False})
        status, out = run(capsys, "code", "verify-mrd", *PHI_2_2_4)
        assert status == EXIT_FAILED
        assert json.loads(out) == {"is_mrd": False}

    def test_export_csv_with_meta(self, capsys, tmp_path):
        """CSV 写入文件，耗时与哈希进入附属文件"""
        target = tmp_path / "out" / "dist.csv"
        status, out = run(capsys, "code", "export", *PHI_2_2_4,
                          "--format", "csv", "--output", str(target))
        assert status == EXIT_OK
        assert out == ""
        body = target.read_text(encoding="utf-8")
        assert body == "rank,count\n0,1\n2,15\n"
        meta = json.loads((tmp_path / "out" / "dist.csv.meta.json").read_text(encoding="utf-8"))
        assert meta["sha256"] == payload_hash(body)
        assert meta["elapsed_ms"] >= 0

    def test_json_output_is_deterministic(self, capsys, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for target in (first, second):
            assert run(capsys, "code", "export", *PHI_2_2_4, "--output", str(target))[0] == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_csv_requires_distribution(self, capsys):
        status, _ = run(capsys, "code", "build", *PHI_2_2_4, "--format", "csv")
        assert status == EXIT_USAGE

    def test_missing_parameter(self, capsys):
        status, _ = run(capsys, "code", "build", "--kind", "phi", "--q", "2", "--m", "2", "--n", "4")
        assert status == EXIT_USAGE

    def test_bad_parameters(self, capsys):
        status, _ = run(capsys, "code", "build", "--kind", "phi", "--q", "2", "--m", "3",
                        "--n", "4", "--t", "1")
        assert status == EXIT_USAGE

    def test_config_file(self, capsys, tmp_path):
        """配置文件提供参数，命令行参数优先"""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"kind": "phi", "q": 2, "m": 2, "n": 4, "t": 3}), encoding="utf-8")
        status, out = run(capsys, "code", "mindist", "--config", str(path), "--t", "1")
        assert status == EXIT_OK
        assert json.loads(out)["min_distance"] == 2

    def test_config_unknown_key(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"kind": "phi", "qq": 2}), encoding="utf-8")
        status, _ = run(capsys, "code", "build", "--config", str(path))
        assert status == EXIT_USAGE

    def test_budget_env(self, capsys, monkeypatch):
        """RANKFORGE_BUDGET 限制码字扫描"""
        monkeypatch.setenv("RANKFORGE_BUDGET", "4")
        status, _ = run(capsys, "code", "mindist", *PHI_2_2_4)
        assert status == EXIT_USAGE


class TestAutCommands:
    """aut 子命令"""

    def test_order_theory_phi(self, capsys):
        status, out = run(capsys, "aut", "order", *PHI_2_2_4, "--method", "theory")
        assert status == EXIT_OK
        assert json.loads(out)["phi"]["total"] == 1080

    def test_order_count_phi(self, capsys):
        status, out = run(capsys, "aut", "order", *PHI_2_2_4, "--method", "count")
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["predicate_count"] == 1080
        assert data["agreement"] is True

    def test_order_count_twisted(self, capsys):
        status, out = run(capsys, "aut", "order", *TWISTED_3_3_3, "--method", "count")
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["predicate_count"] == 156
        assert data["closed_form"] == 156

    def test_order_rejects_gabidulin(self, capsys):
        status, _ = run(capsys, "aut", "order", "--kind", "gabidulin", "--q", "2", "--m", "2",
                        "--n", "4", "--t", "1")
        assert status == EXIT_USAGE

    def test_check_identity(self, capsys):
        triple = json.dumps({"left": [1, 0, 0], "right": [1, 0, 0]})
        status, out = run(capsys, "aut", "check", *TWISTED_3_3_3, "--triple", triple)
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["preserves"] is True
        assert data["predicate"] is True

    def test_check_triple_from_file(self, capsys, tmp_path):
        path = tmp_path / "triple.json"
        path.write_text(json.dumps({"left": [1, 0], "right": [1, 0, 0, 0]}), encoding="utf-8")
        status, out = run(capsys, "aut", "check", *PHI_2_2_4, "--triple", str(path))
        assert status == EXIT_OK
        assert json.loads(out)["preserves"] is True

    def test_check_bad_triple(self, capsys):
        status, _ = run(capsys, "aut", "check", *PHI_2_2_4, "--triple", "{broken")
        assert status == EXIT_USAGE


class TestEquivAndCert:
    """equiv 与 cert 子命令"""

    def test_self_equivalence(self, capsys):
        status, out = run(capsys, "equiv", *TWISTED_3_3_3, "--u", "2")
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["found"] is True
        assert data["witness"]["pre_transpose"] is False

    def test_certificate(self, capsys):
        status, out = run(capsys, "cert", "inequiv", "--q", "3", "--m", "6", "--n", "12",
                          "--t", "1", "--s", "3")
        assert status == EXIT_OK
        data = json.loads(out)
        assert data["c"] == 2
        assert data["bound"] == 80
        assert data["verdict"] is True

    def test_certificate_square_rejected(self, capsys):
        status, _ = run(capsys, "cert", "inequiv", *TWISTED_3_3_3[2:])
        assert status == EXIT_USAGE


class TestGlobalSettings:
    """全局配置的 parallel、output 与 budgets 段进入子命令"""

    def test_parallel_section_defaults(self, monkeypatch):
        monkeypatch.setenv("RANKFORGE_RANKFORGE_PARALLEL__JOBS", "2")
        monkeypatch.setenv("RANKFORGE_RANKFORGE_PARALLEL__CHUNK_SIZE", "5")
        config = load_config(None, {"command": "code build"})
        assert (config.jobs, config.chunk_size) == (2, 5)
        assert load_config(None, {"command": "code build", "jobs": 3}).jobs == 3

    def test_chunk_size_reaches_scan(self, capsys, monkeypatch):
        seen = {}

        def fake_distribution(code, jobs, chunk_size, budget):
            seen.update(jobs=jobs, chunk_size=chunk_size, budget=budget)
            return {0: 1, 2: 15}

        monkeypatch.setattr(cli, "rank_distribution", fake_distribution)
        monkeypatch.setenv("RANKFORGE_RANKFORGE_PARALLEL__CHUNK_SIZE", "5")
        monkeypatch.setenv("RANKFORGE_BUDGET", '{"max_codewords": 99}')
        status, _ = run(capsys, "code", "export", *PHI_2_2_4, "--jobs", "2")
        assert status == EXIT_OK
        assert seen == {"jobs": 2, "chunk_size": 5, "budget": 99}

    def test_output_format_default(self, capsys, monkeypatch):
        monkeypatch.setenv("RANKFORGE_RANKFORGE_OUTPUT__FORMAT", "csv")
        status, out = run(capsys, "code", "export", *PHI_2_2_4)
        assert status == EXIT_OK
        assert out == "rank,count\n0,1\n2,15\n"

    def test_format_flag_wins(self, capsys, monkeypatch):
        monkeypatch.setenv("RANKFORGE_RANKFORGE_OUTPUT__FORMAT", "csv")
        status, out = run(capsys, "code", "export", *PHI_2_2_4, "--format", "json")
        assert status == EXIT_OK
        assert json.loads(out)["distribution"] == {"0": 1, "2": 15}

    def test_table_budget(self, capsys, monkeypatch):
        """F_16 超过 8 的查表预算"""
        monkeypatch.setenv("RANKFORGE_BUDGET", '{"table_budget": 8}')
        assert run(capsys, "field", "--p", "2", "--E", "4")[0] == EXIT_USAGE
        assert run(capsys, "code", "build", *PHI_2_2_4)[0] == EXIT_USAGE

    def test_bad_chunk_size(self, capsys, monkeypatch):
        monkeypatch.setenv("RANKFORGE_RANKFORGE_PARALLEL__CHUNK_SIZE", "0")
        assert run(capsys, "code", "build", *PHI_2_2_4)[0] == EXIT_USAGE

    def test_unexpected_error(self, capsys, monkeypatch):
        """库外异常包装为 E1000，退出码 1"""
        def boom(*args, **kwargs):
            raise RuntimeError("爆炸")

        monkeypatch.setattr(cli, "min_rank_distance", boom)
        status = main(["code", "mindist", *PHI_2_2_4])
        captured = capsys.readouterr()
        assert status == EXIT_FAILED
        assert captured.out == ""
        assert f"[{ErrorCode.UNKNOWN_ERROR.value}] 内部错误: 爆炸" in captured.err


class TestParser:
    """参数解析与报告渲染"""

    def test_missing_subcommand(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_help(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "rankforge" in capsys.readouterr().out

    def test_emit_report_stdout(self, capsys):
        """标准输出只含正文，返回正文哈希"""
        digest = emit_report({"b": 1, "a": [1, 2]})
        out = capsys.readouterr().out
        assert digest == payload_hash(out)
        assert json.loads(out) == {"a": [1, 2], "b": 1}

    def test_load_config_precedence(self, tmp_path):
        """命令行参数覆盖配置文件，预算取自全局配置"""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"q": 2, "m": 2, "budgets": {"gl_budget": 99}}), encoding="utf-8")
        config = load_config(str(path), {"m": 3, "n": None, "command": "code build"})
        assert (config.q, config.m, config.n) == (2, 3, None)
        assert config.budgets.gl_budget == 99
        assert config.budgets.max_codewords == BudgetConfig().max_codewords

    def test_render_helpers(self):
        assert render_csv({"3": 2, "0": 1}) == "rank,count\n0,1\n3,2\n"
        assert render_json({"b": 1, "a": 2}).index('"a"') < render_json({"b": 1, "a": 2}).index('"b"')
