#!/usr/bin/env python
"""
Test complet du système end-to-end : run de référence, petite campagne et rapport
pour chaque fichier de configuration livré.
"""
import sys
import tempfile
from pathlib import Path

# Ajouter le répertoire racine au path
sys.path.insert(0, str(Path(__file__).parent))

from src.analysis.report import breakdown, metrics_frame, render_plain, with_duplication
from src.campaign.fault_engine import campaign
from src.campaign.golden import golden, load_context, write_golden
from src.utils.config import get_settings, load_campaign_config

SMOKE_INJECTIONS = {"injections_per_bit": 1, "injections": 20}


def run_config(path: Path, out_dir: Path) -> bool:
    """Chaîne golden -> campagne réduite -> métriques pour une configuration."""
    print(f"\n🔄 {path.name}")
    config = load_campaign_config(path)
    config = config.model_copy(
        update={"campaign": config.campaign.model_copy(update=SMOKE_INJECTIONS)}
    )

    artifacts = golden(config)
    written = write_golden(artifacts, out_dir)
    print(f"   - Run de référence : {artifacts.run.cycles} cycles, "
          f"{len(artifacts.bindings)} réseaux, {len(artifacts.tables)} tables "
          f"({len(written)} fichiers)")

    context = load_context(config, out_dir)
    matrix = with_duplication(campaign(context, workers=1, show_progress=False), config.area)
    stats = breakdown(matrix)
    print(f"   - {stats['injections']} injections, {stats['n_oe']} erreurs de sortie")
    print(render_plain(metrics_frame(matrix)))
    return len(matrix) > 0


def test_system() -> bool:
    """Test le système complet."""
    print("\n" + "=" * 80)
    print("TEST END-TO-END DES DÉTECTEURS D'ERREURS DE FLOT DE CONTRÔLE")
    print("=" * 80 + "\n")

    settings = get_settings()
    configs = sorted(settings.get_config_path().glob("*.toml"))
    print(f"📋 {len(configs)} configurations dans {settings.get_config_path()}")
    if not configs:
        print("❌ Aucune configuration trouvée")
        return False

    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for path in configs:
            try:
                ok &= run_config(path, Path(tmp) / path.stem)
            except Exception as e:
                print(f"❌ Erreur sur {path.name} : {e}")
                import traceback
                traceback.print_exc()
                ok = False

    print("\n" + "=" * 80)
    print("✨ TEST RÉUSSI" if ok else "❌ TEST ÉCHOUÉ")
    print("=" * 80 + "\n")
    return ok


if __name__ == "__main__":
    success = test_system()
    sys.exit(0 if success else 1)
