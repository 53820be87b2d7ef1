"""
Référence par duplication des registres de contrôle (comparaison à chaque écriture).
"""
from src.analysis.area import AreaModel, duplication_cost
from src.analysis.matrix import DetectionMatrix
from src.models.schemas import Detection, DetectorInfo

DUPLICATION_ID = "duplication"


def duplication_baseline(matrix: DetectionMatrix, model: AreaModel = AreaModel()
                         ) -> DetectionMatrix:
    """
    Ajoute la colonne du détecteur par duplication.

    Un basculement de registre (Case 1) est vu au cycle même de l'injection par le
    comparateur ; une entrée primaire perturbée (Case 2) est recopiée dans les deux
    exemplaires et n'est jamais vue.

    Args:
        matrix: Matrice issue d'une campagne
        model: Modèle de surface (coût e par bit dupliqué)

    Returns:
        Nouvelle matrice avec la colonne `duplication`

    Raises:
        ConfigurationError: Colonne déjà présente
    """
    detections = [
        Detection(detected=True, detect_cycle=row.fault.reference_cycle)
        if row.fault.case == 1 else Detection()
        for row in matrix.rows
    ]
    info = DetectorInfo(
        detector_id=DUPLICATION_ID,
        kind="duplication",
        cost=duplication_cost(matrix.control_register_bits, model),
    )
    return matrix.with_detector(info, detections)
