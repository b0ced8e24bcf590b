from django.core.management.base import CommandError

from phsid.calibration.logic import cost
from phsid.cli.base import EXIT_NUMERICAL, PHSCommand
from phsid.core.integrators import simulate_euler
from phsid.core.systems import cholesky_reduce
from phsid.data.files import load_model, load_signal_csv
from phsid.sensitivity.logic import (
    GRADIENT_CHECK_ATOL,
    GRADIENT_CHECK_RTOL,
    ParameterPoint,
    Structure,
    compare_gradients,
    finite_difference_gradient,
    sensitivity_coefficients,
    tangent_basis,
)


class Command(PHSCommand):
    help = "Compare sensitivity gradient coefficients with central finite differences."

    def add_arguments(self, parser):
        parser.add_argument("--data", required=True)
        parser.add_argument("--input", required=True)
        parser.add_argument("--guess", required=True)
        parser.add_argument("--eps", type=float, default=1e-6)
        parser.add_argument(
            "--structure", choices=[s.value for s in Structure], default=Structure.FULL
        )

    def handle(self, *args, **options):
        if not options["eps"] > 0:
            raise CommandError("--eps must be positive.")

        u = load_signal_csv(options["input"])
        y_data = load_signal_csv(options["data"], u.grid)
        guess = cholesky_reduce(load_model(options["guess"]))
        v = ParameterPoint.from_system(guess)
        basis = tangent_basis(v.n, Structure(options["structure"]))

        sys = v.system(guess.B_t)
        sensitivity = sensitivity_coefficients(sys, simulate_euler(sys, u), y_data, basis)
        fd = finite_difference_gradient(
            lambda h, alpha: v.trial_system(guess.B_t, h, alpha),
            lambda trial: cost(trial, u, y_data),
            basis,
            options["eps"],
        )
        rows = compare_gradients(basis, sensitivity, fd)

        self.stdout.write(
            f"{'direction':<10} {'sensitivity':>16} {'finite diff':>16} {'rel err':>10}"
        )
        for row in rows:
            line = (
                f"{row.label:<10} {row.sensitivity:>16.8e} "
                f"{row.finite_difference:>16.8e} {row.relative_error:>10.2e}"
            )
            self.stdout.write(line if row.passed else f"{line}  FAIL")

        failed = [row.label for row in rows if not row.passed]
        if failed:
            raise CommandError(
                f"{len(failed)} of {len(rows)} directions exceed rtol "
                f"{GRADIENT_CHECK_RTOL:g} (atol {GRADIENT_CHECK_ATOL:g}): "
                + ", ".join(failed),
                returncode=EXIT_NUMERICAL,
            )
        self.stdout.write(f"All {len(rows)} directions pass.")
