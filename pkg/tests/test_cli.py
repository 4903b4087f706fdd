import io
from fractions import Fraction

import pytest

from hyperdiff.cli import main, read_operator_table
from hyperdiff.scalars import QComplex
from hyperdiff.series import (
    PolynomialOperator,
    read_coefficients,
    write_operator,
)


def run(*argv):
    return main(list(argv))


class TestExitCodes:
    def test_no_command_is_config_error(self, capsys):
        assert run() == 2

    def test_empty_config_file(self, tmp_path):
        cfg = tmp_path / "empty.cfg"
        cfg.write_text("")
        assert run("--config", str(cfg)) == 2

    def test_unknown_family(self, tmp_path):
        assert run("check-properties", "--family", "F9", "--out", str(tmp_path)) == 2

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("command=check-properties\nfamily=F1\nwhatever=1\n")
        assert run("--config", str(cfg)) == 2

    def test_missing_precondition(self, tmp_path):
        # (P) with an empty sample set
        rc = run(
            "check-properties",
            "--family",
            "F1",
            "--props",
            "P",
            "--u-samples",
            "",
            "--out",
            str(tmp_path),
        )
        assert rc == 3

    def test_cap_exhaustion(self, tmp_path):
        rc = run(
            "build-m0",
            "--family",
            "F4",
            "--count",
            "6",
            "--n-start",
            "3",
            "--n-cap",
            "100",
            "--out",
            str(tmp_path),
        )
        assert rc == 4


class TestConfigFile:
    def test_command_from_config(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"command=check-properties\nfamily=F4\nprops=Q\nn_max=30\nout={out}\n"
        )
        assert run("--config", str(cfg)) == 0
        assert (out / "property_Q.csv").exists()
        assert "property (Q): supports" in capsys.readouterr().out

    def test_flag_overrides_config(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"command=unicity\npoints=linear\nout={out}\n")
        assert run("--config", str(cfg), "--points", "sqrt") == 0
        assert "chi estimate: 2.0" in capsys.readouterr().out

    def test_conflicting_commands_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("command=unicity\n")
        assert run("synthesize", "--config", str(cfg), "--family", "F4") == 2


class TestRoundTrip:
    def test_inverse_file_reparses_identically(self, tmp_path, capsys):
        out = tmp_path / "inv"
        assert (
            run(
                "build-inverse",
                "--family",
                "F4",
                "--n",
                "6",
                "--k",
                "2",
                "--out",
                str(out),
            )
            == 0
        )
        assert "identity: exact" in capsys.readouterr().out
        path = out / "inverse_n6_k2.coeffs"
        with open(path) as handle:
            f = read_coefficients(handle)
        buf = io.StringIO()
        from hyperdiff.series import write_taylor

        write_taylor(f, buf)
        body = [l for l in path.read_text().splitlines() if not l.startswith("# route")]
        assert buf.getvalue().splitlines() == body

    def test_vector_round_trip(self, tmp_path):
        out = tmp_path / "syn"
        assert run("synthesize", "--family", "F4", "--count", "4", "--out", str(out)) == 0
        path = out / "vector.coeffs"
        with open(path) as handle:
            f = read_coefficients(handle)
        buf = io.StringIO()
        from hyperdiff.series import write_taylor

        write_taylor(f, buf)
        assert buf.getvalue() == path.read_text()


class TestIdempotence:
    def test_rerun_overwrites_with_identical_bytes(self, tmp_path):
        out = tmp_path / "m0"
        args = (
            "build-m0",
            "--family",
            "F4",
            "--count",
            "5",
            "--n-start",
            "3",
            "--out",
            str(out),
        )
        assert run(*args) == 0
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        assert run(*args) == 0
        second = {p.name: p.read_bytes() for p in out.iterdir()}
        assert first == second


class TestOperatorTable:
    def test_read_multi_block_table(self, tmp_path):
        path = tmp_path / "table.coeffs"
        ops = [
            PolynomialOperator({3: QComplex(1)}),
            PolynomialOperator({5: QComplex(Fraction(1, 2)), 6: QComplex(1)}),
        ]
        with open(path, "w") as handle:
            for op in ops:
                write_operator(op, handle)
        assert read_operator_table(str(path)) == ops

    def test_f5_through_cli(self, tmp_path, capsys):
        path = tmp_path / "table.coeffs"
        ops = [PolynomialOperator({n: QComplex(1)}) for n in range(3, 40)]
        with open(path, "w") as handle:
            for op in ops:
                write_operator(op, handle)
        out = tmp_path / "out"
        rc = run(
            "check-properties",
            "--family",
            "F5",
            "--table",
            str(path),
            "--props",
            "Q",
            "--n-min",
            "1",
            "--n-max",
            "37",
            "--out",
            str(out),
        )
        assert rc == 0
        assert "property (Q):" in capsys.readouterr().out


class TestCommands:
    def test_perturb_outputs(self, tmp_path, capsys):
        out = tmp_path / "p"
        rc = run(
            "perturb",
            "--family",
            "F4",
            "--count",
            "6",
            "--g",
            "0,0,0,1",
            "--out",
            str(out),
        )
        assert rc == 0
        lines = (out / "perturb.csv").read_text().splitlines()
        assert lines[0] == "i,n_i,annihilated,residual_log,base_residual_log,exactly_equal"
        assert len(lines) == 7

    def test_verify_criterion_output(self, tmp_path, capsys):
        out = tmp_path / "c"
        rc = run(
            "verify-criterion",
            "--family",
            "F4",
            "--route",
            "Q",
            "--n-max",
            "30",
            "--k-max",
            "2",
            "--out",
            str(out),
        )
        assert rc == 0
        assert "overall: supports" in capsys.readouterr().out
        assert (out / "criterion.jsonl").exists()

    def test_joint_outputs(self, tmp_path):
        out = tmp_path / "j"
        rc = run("joint", "--family", "F4", "--out", str(out))
        assert rc == 0
        assert (out / "joint.csv").exists()
        assert (out / "trace_0.jsonl").exists() and (out / "trace_1.jsonl").exists()

    def test_augment_outputs(self, tmp_path):
        out = tmp_path / "a"
        rc = run("augment", "--family", "F4", "--out", str(out))
        assert rc == 0
        header = (out / "augment.csv").read_text().splitlines()[0]
        assert header == "lambda,target,step,n,radius,direct_log,bound_log,stated_log,ok"


class TestErrorCodes:
    def test_exception_exit_codes(self):
        from hyperdiff.errors import (
            CapExhausted,
            ConfigError,
            InvariantViolation,
            PreconditionError,
        )

        assert ConfigError("x").exit_code == 2
        assert PreconditionError("x").exit_code == 3
        assert CapExhausted("x").exit_code == 4
        assert InvariantViolation("x").exit_code == 5

    def test_exact_mode_on_float_family_rejected(self, tmp_path):
        rc = main(
            ["build-inverse", "--family", "F2", "--n", "4", "--k", "1",
             "--mode", "exact", "--out", str(tmp_path)]
        )
        assert rc == 3

    def test_float_mode_coerces(self, tmp_path, capsys):
        rc = main(
            ["build-inverse", "--family", "F4", "--n", "4", "--k", "1",
             "--mode", "float", "--out", str(tmp_path)]
        )
        assert rc == 0
        assert "floating" in capsys.readouterr().out
