from django import forms
from django.core.exceptions import ValidationError

from phsid.calibration.logic import CalibrationConfig, PSDMode
from phsid.sensitivity.logic import Structure


class CalibrationConfigForm(forms.Form):
    """Calibration config file; absent fields fall back to CalibrationConfig defaults."""

    sigma_init = forms.FloatField(required=False)
    gamma = forms.FloatField(required=False)
    eps_stop = forms.FloatField(required=False)
    max_iter = forms.IntegerField(required=False, min_value=0)
    max_halvings = forms.IntegerField(required=False, min_value=0)
    structure = forms.ChoiceField(
        required=False, choices=[(s.value, s.value) for s in Structure]
    )
    psd_mode = forms.ChoiceField(
        required=False, choices=[(m.value, m.value) for m in PSDMode]
    )

    def clean_sigma_init(self):
        sigma = self.cleaned_data["sigma_init"]
        if sigma is not None and sigma <= 0:
            raise ValidationError("Initial step must be positive.", code="range")
        return sigma

    def clean_gamma(self):
        gamma = self.cleaned_data["gamma"]
        if gamma is not None and not 0 < gamma < 1:
            raise ValidationError("Armijo parameter must lie in (0, 1).", code="range")
        return gamma

    def clean_eps_stop(self):
        eps = self.cleaned_data["eps_stop"]
        if eps is not None and eps <= 0:
            raise ValidationError("Stopping threshold must be positive.", code="range")
        return eps

    def config(self) -> CalibrationConfig:
        given = {k: v for k, v in self.cleaned_data.items() if v not in (None, "")}
        return CalibrationConfig(**given)
