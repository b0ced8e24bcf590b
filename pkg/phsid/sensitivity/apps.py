from django.apps import AppConfig


class SensitivityConfig(AppConfig):
    name = "phsid.sensitivity"
