from dataclasses import replace

from django.core.management.base import CommandError

from phsid.calibration.logic import CalibrationConfig, PSDMode, calibrate
from phsid.cli.base import EXIT_NOT_CONVERGED, PHSCommand
from phsid.core.systems import Signal, cholesky_reduce
from phsid.data.files import (
    load_config,
    load_model,
    load_signal_csv,
    save_history_csv,
    save_result,
    save_signal_csv,
)
from phsid.sensitivity.logic import ParameterPoint, Structure

OVERRIDES = (
    "sigma_init",
    "gamma",
    "eps_stop",
    "max_iter",
    "max_halvings",
    "structure",
    "psd_mode",
)


class Command(PHSCommand):
    help = (
        "Fit J, R and the initial state of a model to reference data by "
        "projected gradient descent with Armijo backtracking."
    )

    def add_arguments(self, parser):
        parser.add_argument("--data", required=True, help="Reference output CSV.")
        parser.add_argument("--input", required=True, help="Input signal CSV.")
        parser.add_argument("--guess", required=True, help="Initial model JSON.")
        parser.add_argument("--config", help="Calibration config JSON.")
        parser.add_argument("--out", required=True, help="Result JSON.")
        parser.add_argument("--history", required=True, help="Cost history CSV.")
        parser.add_argument("--diff", required=True, help="y_data - y_opt CSV.")

        overrides = parser.add_argument_group("config overrides")
        overrides.add_argument("--sigma-init", type=float)
        overrides.add_argument("--gamma", type=float)
        overrides.add_argument("--eps-stop", type=float)
        overrides.add_argument("--max-iter", type=int)
        overrides.add_argument("--max-halvings", type=int)
        overrides.add_argument("--structure", choices=[s.value for s in Structure])
        overrides.add_argument("--psd-mode", choices=[m.value for m in PSDMode])

    def config(self, options) -> CalibrationConfig:
        cfg = load_config(options["config"]) if options["config"] else CalibrationConfig()
        given = {key: options[key] for key in OVERRIDES if options.get(key) is not None}
        return replace(cfg, **given) if given else cfg

    def handle(self, *args, **options):
        cfg = self.config(options)
        u = load_signal_csv(options["input"])
        y_data = load_signal_csv(options["data"], u.grid)
        guess = cholesky_reduce(load_model(options["guess"]))

        result = calibrate(ParameterPoint.from_system(guess), u, y_data, guess.B_t, cfg)

        save_result(options["out"], result)
        save_history_csv(options["history"], result)
        if result.y_opt is not None:
            diff = Signal(u.grid, y_data.values - result.y_opt.values)
            save_signal_csv(options["diff"], diff, "dy")

        self.stdout.write(
            f"{result.reason}: cost {result.final_cost:.6e} "
            f"after {result.iterations} iterations."
        )
        if not result.converged:
            raise CommandError(
                f"Calibration did not converge ({result.reason}).",
                returncode=EXIT_NOT_CONVERGED,
            )
