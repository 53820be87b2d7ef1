"""
Tests pour les métriques de détection et la référence par duplication.
"""
import pytest

from src.analysis.area import AreaModel
from src.analysis.duplication import DUPLICATION_ID, duplication_baseline
from src.analysis.metrics import metrics
from src.utils.errors import ConfigurationError, UndefinedMetricError

PN = [("pn", "petri", 4.0)]


@pytest.fixture
def four_rows(make_matrix):
    """Quatre erreurs : détectée à +3, à +5, par contrôle final, non détectée."""
    return make_matrix(
        [
            ("sdc", 10, [13]),
            ("sdc", 20, [25]),
            ("premature", 30, ["final"]),
            ("timeout", 40, [None]),
        ],
        PN,
    )


def test_hand_computed_metrics(four_rows):
    """Test DR, DR_TO et latence sur la matrice calculée à la main."""
    m = metrics(four_rows, ["pn"])

    assert m.dr == pytest.approx(0.75)
    assert m.dr_to == pytest.approx(0.25)
    assert m.latency == pytest.approx(4.0)
    assert (m.n_oe, m.n_tp, m.n_to) == (4, 3, 1)
    assert m.n_sdc == 2
    assert m.n_abnormal == 2


def test_half_detected(make_matrix):
    """Test DR = 0,5 quand une erreur sur deux est détectée."""
    rows = [("sdc", i, [i + 1 if i % 2 else None]) for i in range(100)]

    assert metrics(make_matrix(rows, PN), ["pn"]).dr == pytest.approx(0.5)


def test_final_only_detections(make_matrix):
    """Test qu'avec des détections uniquement finales DR_TO = DR et la latence est absente."""
    matrix = make_matrix([("sdc", 1, ["final"]), ("sdc", 2, ["final"]), ("sdc", 3, [None])], PN)

    m = metrics(matrix, ["pn"])

    assert m.dr_to == m.dr == pytest.approx(2 / 3)
    assert m.latency is None


def test_correct_rows_are_benign(make_matrix):
    """Test qu'une détection sur sortie correcte n'entre pas dans N_TP."""
    matrix = make_matrix([("correct", 5, [6]), ("correct", 5, [None]), ("sdc", 5, [None])], PN)

    m = metrics(matrix, ["pn"])

    assert m.n_oe == 1
    assert m.n_tp == 0
    assert m.benign == 1


def test_subset_union_uses_first_online_detection(make_matrix):
    """Test la latence d'une union : première détection en ligne, contrôle final ignoré."""
    matrix = make_matrix(
        [("sdc", 10, [18, 12, "final"]), ("sdc", 0, ["final", None, "final"])],
        [("a", "petri", 1.0), ("b", "sequence", 1.0), ("c", "petri", 1.0)],
    )

    m = metrics(matrix, ["a", "b", "c"])

    assert m.dr == 1.0
    assert m.dr_to == pytest.approx(0.5)
    assert m.latency == pytest.approx(2.0)
    assert metrics(matrix, ["c"]).dr_to == 1.0
    assert metrics(matrix, []).dr == 0.0


def test_no_output_error_is_undefined(make_matrix):
    """Test qu'une matrice sans erreur de sortie rend le DR indéfini."""
    matrix = make_matrix([("correct", 1, [2])], PN)

    with pytest.raises(UndefinedMetricError):
        metrics(matrix, ["pn"])
    with pytest.raises(UndefinedMetricError):
        metrics(make_matrix([], PN), ["pn"])


def test_unknown_detector(four_rows):
    """Test le refus d'un détecteur absent de la matrice."""
    with pytest.raises(ConfigurationError):
        metrics(four_rows, ["ghost"])


def test_duplication_case1(four_rows):
    """Test que la duplication détecte toutes les erreurs Case 1 au cycle de la faute."""
    matrix = duplication_baseline(four_rows)

    m = metrics(matrix, [DUPLICATION_ID])
    assert m.dr == 1.0
    assert m.dr_to == 0.0
    assert m.latency == 0.0
    assert matrix.detector(DUPLICATION_ID).cost == pytest.approx(2 * 9)
    assert matrix.detector_ids == ["pn", DUPLICATION_ID]


def test_duplication_case2(make_matrix):
    """Test que la duplication ne voit aucune perturbation d'entrée."""
    matrix = make_matrix([("sdc", 3, [4]), ("timeout", 8, [None])], PN, case=2)

    m = metrics(duplication_baseline(matrix), [DUPLICATION_ID])

    assert m.dr == 0.0
    assert m.latency is None


def test_duplication_cost_and_repeat(make_matrix):
    """Test le coût e x bits et le refus d'une seconde colonne de duplication."""
    matrix = make_matrix([("sdc", 3, [None])], PN, control_register_bits=37)

    dup = duplication_baseline(matrix, AreaModel(e=0.5))
    assert dup.detector(DUPLICATION_ID).cost == pytest.approx(18.5)
    with pytest.raises(ConfigurationError):
        duplication_baseline(dup)


def test_duplication_empty_matrix(make_matrix):
    """Test qu'une matrice vide reste vide et sans métrique définie."""
    dup = duplication_baseline(make_matrix([], PN))

    assert len(dup) == 0
    with pytest.raises(UndefinedMetricError):
        metrics(dup, [DUPLICATION_ID])
