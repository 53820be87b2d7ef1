"""
Tests pour la ligne de commande : commandes, fichiers produits et codes de sortie.
"""
import math

import pytest

from src.campaign.matrix_io import read_matrix, write_matrix
from src.cli import exit_code, main, parse_budgets
from src.utils.errors import (
    ConfigurationError,
    DesignDefectError,
    InfeasibleTargetError,
    MatrixFormatError,
)
from tests.conftest import FIXTURES, write_config


@pytest.fixture
def matrix_file(tmp_path, make_matrix):
    """Matrice écrite sur disque : trois erreurs, deux détecteurs."""
    matrix = make_matrix(
        [("sdc", 10, [12, None]), ("timeout", 20, [None, 21]), ("sdc", 30, [None, None])],
        [("AES_1", "petri", 4.0), ("seq_L3_T1", "sequence", 20.0)],
    )
    return write_matrix(matrix, tmp_path / "runs" / "matrix.csv")


def test_parse_budgets():
    """Test la lecture des budgets de la ligne de commande."""
    assert parse_budgets("10, 0,inf") == [0.0, 10.0, math.inf]
    with pytest.raises(ConfigurationError):
        parse_budgets("ten")
    with pytest.raises(ConfigurationError):
        parse_budgets("-1")


def test_exit_codes():
    """Test la correspondance exception / code de sortie."""
    assert exit_code(ConfigurationError("x")) == 1
    assert exit_code(InfeasibleTargetError(0.9, 0.5)) == 1
    assert exit_code(DesignDefectError("x")) == 2
    assert exit_code(MatrixFormatError("x", 3)) == 3
    assert exit_code(FileNotFoundError("x")) == 3


def test_usage_errors_exit_1(tmp_path):
    """Test les erreurs d'usage et de configuration."""
    assert main([]) == 1
    assert main(["golden"]) == 1
    assert main(["golden", "--config", str(tmp_path / "absent.toml")]) == 1
    assert main(["select", "--matrix", str(tmp_path / "m.csv")]) == 1


def test_bad_matrix_exit_3(tmp_path):
    """Test qu'une matrice absente ou mal formée donne le code 3."""
    bad = tmp_path / "bad.csv"
    bad.write_text("# design=aes\ninj_id\n", encoding="utf-8")

    assert main(["report", "--matrix", str(bad)]) == 3
    assert main(["report", "--matrix", str(tmp_path / "absent.csv")]) == 3


def test_campaign_without_golden_exit_3(aes_config):
    """Test qu'une campagne sans artefacts de référence échoue en entrée/sortie."""
    assert main(["campaign", "--config", str(aes_config), "--no-progress"]) == 3


def test_golden_campaign_report(tmp_path, aes_config, capsys):
    """Test la chaîne complète golden, campaign puis report sur l'AES."""
    out = tmp_path / "out"

    assert main(["golden", "--config", str(aes_config)]) == 0
    assert (out / "golden.json").exists()
    assert (out / "golden_trace.csv").exists()
    assert len(list((out / "nets").glob("*.pn"))) == 7
    assert list((out / "tables").glob("*.seq"))

    assert main(["campaign", "--config", str(aes_config), "--no-progress"]) == 0
    matrix = read_matrix(out / "matrix.csv")
    assert len(matrix) == 9
    assert matrix.design == "aes" and matrix.case == 1

    assert main(["report", "--config", str(aes_config), "--budgets", "0,50,inf", "--plain"]) == 0
    assert (out / "metrics.csv").exists()
    assert "duplication" in capsys.readouterr().out


def test_empty_case2_campaign(tmp_path):
    """Test qu'une campagne Case 2 sans injection écrit une matrice d'en-tête seul."""
    config = write_config(tmp_path, "aes", 2, injections=0)

    assert main(["golden", "--config", str(config)]) == 0
    assert main(["campaign", "--config", str(config), "--no-progress"]) == 0
    lines = (tmp_path / "out" / "matrix.csv").read_text(encoding="utf-8").splitlines()
    assert [line for line in lines if not line.startswith("#")][0].startswith("inj_id,case,")
    assert len([line for line in lines if not line.startswith("#")]) == 1
    assert main(["report", "--config", str(config)]) == 0


def test_report_writes_next_to_matrix(matrix_file, capsys):
    """Test les rapports écrits à côté de la matrice."""
    assert main(["report", "--matrix", str(matrix_file), "--plain"]) == 0

    lines = (matrix_file.parent / "metrics.csv").read_text(encoding="utf-8").splitlines()
    assert "# design=aes" in lines
    assert "family:petri+sequence" in capsys.readouterr().out


def test_select(matrix_file, tmp_path, capsys):
    """Test la sélection sous budgets et pour un DR cible."""
    out = tmp_path / "sel"

    code = main(["select", "--matrix", str(matrix_file), "--budgets", "4,30",
                 "--dr-target", "0.3", "--out", str(out), "--plain"])

    assert code == 0
    text = (out / "selection.csv").read_text(encoding="utf-8")
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    assert rows[0].startswith("mode,constraint,subset,cost,dr")
    assert rows[1].startswith("max-dr,4.000000,AES_1,")
    assert rows[2].startswith("max-dr,30.000000,AES_1+seq_L3_T1,")
    assert rows[3].startswith("min-area,0.300000,AES_1,")
    assert "max-dr" in capsys.readouterr().out


def test_select_infeasible_target(matrix_file):
    """Test qu'un DR cible inatteignable donne le code 1."""
    assert main(["select", "--matrix", str(matrix_file), "--family", "sequence",
                 "--dr-target", "0.9"]) == 1


def test_several_matrices_are_prefixed(matrix_file, tmp_path, make_matrix):
    """Test le préfixe circuit/case quand plusieurs matrices sont traitées."""
    other = write_matrix(
        make_matrix([("sdc", 1, [2, None])],
                    [("AES_1", "petri", 4.0), ("seq_L3_T1", "sequence", 20.0)], case=2),
        tmp_path / "other.csv",
    )
    out = tmp_path / "reports"

    assert main(["report", "--matrix", str(matrix_file), "--matrix", str(other),
                 "--out", str(out), "--plain"]) == 0
    assert (out / "aes_case1_metrics.csv").exists()
    assert (out / "aes_case2_metrics.csv").exists()


def test_select_with_duplication_on_request(matrix_file, tmp_path):
    """Test que la duplication n'entre dans les candidats que sur demande."""
    out = tmp_path / "sel"

    assert main(["select", "--matrix", str(matrix_file), "--budgets", "30",
                 "--family", "all+duplication", "--out", str(out), "--plain"]) == 0

    text = (out / "selection.csv").read_text(encoding="utf-8")
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    assert rows[1].startswith("max-dr,30.000000,duplication,")


def test_select_on_versioned_matrix(tmp_path):
    """Test la sélection sur la matrice AES Case 1 versionnée."""
    out = tmp_path / "sel"

    assert main(["select", "--matrix", str(FIXTURES / "aes_case1_matrix.csv"), "--budgets",
                 "10,30,40", "--dr-target", "0.8", "--out", str(out), "--plain"]) == 0

    text = (out / "selection.csv").read_text(encoding="utf-8")
    assert "# family=all" in text.splitlines()
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    assert rows[1:] == [
        "max-dr,10.000000,AES_1+AES_2,10.000000,0.666667,0.333333,2.500000,6,4,1",
        "max-dr,30.000000,AES_1+AES_2,10.000000,0.666667,0.333333,2.500000,6,4,1",
        "max-dr,40.000000,AES_1+AES_2+seq_L3_T1,36.750000,0.833333,0.166667,1.250000,6,5,1",
        "min-area,0.800000,AES_1+AES_2+seq_L3_T1,36.750000,0.833333,0.166667,1.250000,6,5,1",
    ]


def test_report_on_versioned_matrices(tmp_path):
    """Test les rapports des deux matrices versionnées traitées ensemble."""
    out = tmp_path / "reports"

    assert main(["report", "--matrix", str(FIXTURES / "aes_case1_matrix.csv"),
                 "--matrix", str(FIXTURES / "aes_case2_matrix.csv"), "--budgets", "10,40",
                 "--out", str(out), "--plain"]) == 0

    case1 = (out / "aes_case1_metrics.csv").read_text(encoding="utf-8").splitlines()
    assert "# n_oe=6" in case1
    assert "duplication,18.000000,1.000000,0.000000,0.000000,6,6,2" in case1
    case2 = (out / "aes_case2_metrics.csv").read_text(encoding="utf-8").splitlines()
    assert "duplication,18.000000,0.000000,0.000000,,3,0,0" in case2
    tradeoff = (out / "aes_case1_tradeoff.csv").read_text(encoding="utf-8").splitlines()
    assert [line for line in tradeoff if not line.startswith("#")][1:] == [
        "10.000000,0.666667,0.333333,AES_1+AES_2",
        "40.000000,0.833333,0.166667,AES_1+AES_2+seq_L3_T1",
    ]
