from django.apps import AppConfig


class CalibrationAppConfig(AppConfig):
    name = "phsid.calibration"
