from django.test import SimpleTestCase

from phsid.calibration.forms import CalibrationConfigForm
from phsid.calibration.logic import CalibrationConfig, PSDMode
from phsid.sensitivity.logic import Structure


class CalibrationConfigFormTests(SimpleTestCase):
    def test_empty_config_uses_defaults(self):
        form = CalibrationConfigForm({})
        self.assertTrue(form.is_valid())
        self.assertEqual(form.config(), CalibrationConfig())

    def test_partial_config(self):
        form = CalibrationConfigForm({"sigma_init": 2.5, "structure": "diagonal_R"})
        self.assertTrue(form.is_valid())
        cfg = form.config()
        self.assertEqual(cfg.sigma_init, 2.5)
        self.assertEqual(cfg.structure, Structure.DIAGONAL_R)
        self.assertEqual(cfg.psd_mode, PSDMode.PROJECT)

    def test_gamma_range(self):
        form = CalibrationConfigForm({"gamma": 1.5})
        self.assertFalse(form.is_valid())
        self.assertEqual(form.errors.as_data()["gamma"][0].code, "range")

    def test_negative_step(self):
        form = CalibrationConfigForm({"sigma_init": 0})
        self.assertFalse(form.is_valid())
        self.assertIn("sigma_init", form.errors)

    def test_unknown_structure(self):
        form = CalibrationConfigForm({"structure": "banded"})
        self.assertFalse(form.is_valid())
        self.assertEqual(form.errors.as_data()["structure"][0].code, "invalid_choice")

    def test_negative_iterations(self):
        self.assertFalse(CalibrationConfigForm({"max_iter": -1}).is_valid())
