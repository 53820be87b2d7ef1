"""
Tests pour la lecture et l'écriture des matrices de détection.
"""
import pytest

from src.analysis.matrix import DetectionMatrix, matrix_columns
from src.campaign.matrix_io import read_matrix, write_matrix
from src.models.schemas import DetectorInfo
from src.utils.errors import ConfigurationError, ContractViolationError, MatrixFormatError

DETECTORS = [("AES_1", "petri", 4.0), ("seq_L3_T1", "sequence", 26.75)]


@pytest.fixture
def small_matrix(make_matrix):
    """Matrice Case 1 de trois lignes, une cellule de chaque sorte."""
    return make_matrix(
        [
            ("sdc", 10, [12, "final"]),
            ("correct", 3, [None, None]),
            ("timeout", 7, [None, 9]),
        ],
        DETECTORS,
        seed=5,
    )


def test_round_trip(tmp_path, small_matrix):
    """Test l'écriture puis la relecture d'une matrice Case 1."""
    path = write_matrix(small_matrix, tmp_path / "m.csv")

    loaded = read_matrix(path)

    assert loaded.rows == small_matrix.rows
    assert loaded.detectors == small_matrix.detectors
    assert (loaded.design, loaded.case, loaded.seed) == ("aes", 1, 5)
    assert loaded.golden_cycles == 100
    assert loaded.control_register_bits == 9


def test_round_trip_case2(tmp_path, make_matrix):
    """Test la relecture des fautes Case 2 (entrées, fenêtre, indice)."""
    matrix = make_matrix([("premature", 4, [5, None]), ("sdc", 9, [None, "final"])],
                         DETECTORS, case=2, seed=11)

    loaded = read_matrix(write_matrix(matrix, tmp_path / "m2.csv"))

    assert loaded.rows == matrix.rows
    assert loaded.rows[1].fault.inputs == ["pt_valid", "pt_eos"]


def test_file_layout(tmp_path, small_matrix):
    """Test l'en-tête commenté et les colonnes du fichier."""
    lines = write_matrix(small_matrix, tmp_path / "m.csv").read_text(encoding="utf-8").splitlines()

    assert lines[0].startswith("# tool_version=")
    assert "# detector=AES_1,petri,4" in lines
    assert "# detector=seq_L3_T1,sequence,26.75" in lines
    header = next(line for line in lines if not line.startswith("#"))
    assert header.split(",") == matrix_columns(["AES_1", "seq_L3_T1"])
    assert lines[-1] == "2,1,enc/round,2,7,timeout,100,0,,0,1,9,0"


def test_empty_matrix_has_header_only(tmp_path, make_matrix):
    """Test qu'une matrice vide s'écrit avec son seul en-tête et se relit."""
    path = write_matrix(make_matrix([], DETECTORS), tmp_path / "empty.csv")

    body = [line for line in path.read_text(encoding="utf-8").splitlines()
            if not line.startswith("#")]
    assert len(body) == 1
    assert len(read_matrix(path)) == 0


def test_bad_row_reports_line_number(tmp_path, small_matrix):
    """Test le numéro de ligne d'une valeur invalide."""
    path = write_matrix(small_matrix, tmp_path / "m.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[-2] = lines[-2].replace("correct", "sideways")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    with pytest.raises(MatrixFormatError) as info:
        read_matrix(path)
    assert info.value.row == len(lines) - 1


def test_missing_header_key(tmp_path, small_matrix):
    """Test le refus d'un en-tête sans circuit."""
    path = write_matrix(small_matrix, tmp_path / "m.csv")
    text = "\n".join(line for line in path.read_text(encoding="utf-8").splitlines()
                     if not line.startswith("# design="))
    path.write_text(text + "\n", encoding="utf-8")

    with pytest.raises(MatrixFormatError, match="design"):
        read_matrix(path)


def test_duplicate_inj_id(tmp_path, small_matrix):
    """Test le refus d'un indice d'injection répété."""
    path = write_matrix(small_matrix, tmp_path / "m.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    path.write_text("\n".join(lines + [lines[-1]]) + "\n", encoding="utf-8")

    with pytest.raises(MatrixFormatError, match="dupliqué"):
        read_matrix(path)


def test_inconsistent_cells(tmp_path, small_matrix):
    """Test le refus d'une cellule non détectée avec un cycle."""
    path = write_matrix(small_matrix, tmp_path / "m.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[-1] = "2,1,enc/round,2,7,timeout,100,0,4,0,1,9,0"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    with pytest.raises(MatrixFormatError):
        read_matrix(path)


def test_missing_file(tmp_path):
    """Test l'erreur sur un fichier absent."""
    with pytest.raises(FileNotFoundError):
        read_matrix(tmp_path / "absent.csv")


def test_matrix_shape_checks(small_matrix):
    """Test les contrôles de forme de la matrice en mémoire."""
    with pytest.raises(ConfigurationError):
        DetectionMatrix("aes", 1, 100, 9, detectors=[DetectorInfo(detector_id="x", kind="petri",
                                                                  cost=1.0)] * 2)
    with pytest.raises(ContractViolationError):
        small_matrix.append(small_matrix.rows[0].model_copy(update={"detections": []}))


def test_restricted_keeps_matrix_order(small_matrix):
    """Test la restriction aux colonnes demandées."""
    sub = small_matrix.restricted(["seq_L3_T1"])

    assert sub.detector_ids == ["seq_L3_T1"]
    assert sub.rows[0].detections[0].via_final
    with pytest.raises(ConfigurationError):
        small_matrix.restricted(["ghost"])
