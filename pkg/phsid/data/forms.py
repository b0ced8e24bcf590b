from django import forms
from django.core.exceptions import ValidationError

from phsid.core.exceptions import DimensionMismatchError, InvariantError
from phsid.core.matrices import (
    PSDMatrix,
    SkewSymmetricMatrix,
    SPDMatrix,
)
from phsid.core.systems import PHSystem


def _shape(value) -> tuple[int, ...]:
    if not isinstance(value, list):
        return ()
    if value and all(isinstance(row, list) for row in value):
        widths = {len(row) for row in value}
        return (len(value), widths.pop()) if len(widths) == 1 else (len(value), -1)
    return (len(value),)


def _build(constructor, value, name):
    try:
        return constructor(value, name)
    except InvariantError as e:
        raise ValidationError(str(e), code=e.code) from e


class SystemForm(forms.Form):
    """Model file: n, k, J (skew), R (symmetric PSD), optional Q (SPD), B, x_hat."""

    n = forms.IntegerField(min_value=1)
    k = forms.IntegerField(min_value=1)
    J = forms.JSONField()
    R = forms.JSONField()
    Q = forms.JSONField(required=False)
    B = forms.JSONField()
    x_hat = forms.JSONField()

    def _square(self, field):
        value = self.cleaned_data[field]
        n = self.cleaned_data.get("n")
        if n is not None and _shape(value) != (n, n):
            raise ValidationError(f"{field} must be a {n}x{n} array.", code="dimension")
        return value

    def clean_J(self):
        return _build(SkewSymmetricMatrix.from_array, self._square("J"), "J")

    def clean_R(self):
        return _build(PSDMatrix.from_array, self._square("R"), "R")

    def clean_Q(self):
        if self.cleaned_data["Q"] is None:
            return None
        return _build(SPDMatrix.from_array, self._square("Q"), "Q")

    def clean_B(self):
        value = self.cleaned_data["B"]
        n, k = self.cleaned_data.get("n"), self.cleaned_data.get("k")
        if n is not None and k is not None and _shape(value) != (n, k):
            raise ValidationError(f"B must be a {n}x{k} array.", code="dimension")
        return value

    def clean_x_hat(self):
        value = self.cleaned_data["x_hat"]
        n = self.cleaned_data.get("n")
        if n is not None and _shape(value) != (n,):
            raise ValidationError(f"x_hat must have length {n}.", code="dimension")
        return value

    def system(self) -> PHSystem:
        data = self.cleaned_data
        Q = data["Q"] or SPDMatrix.identity(data["n"])
        return PHSystem(J=data["J"], R=data["R"], Q=Q, B=data["B"], x_hat=data["x_hat"])


def raise_for_form(form: forms.Form, source: str):
    """Turn an invalid form into DimensionMismatchError or InvariantError."""
    if form.is_valid():
        return

    messages, codes = [], []
    for field, errors in form.errors.as_data().items():
        for error in errors:
            for message in error.messages:
                messages.append(f"{field}: {message}")
            codes.append(error.code or "invalid")

    diagnostic = f"{source}: " + "; ".join(messages)
    if "dimension" in codes:
        raise DimensionMismatchError(diagnostic)
    raise InvariantError(diagnostic, code=codes[0])
