from django.conf import settings
from django.core.management.base import CommandError

from phsid.cli.base import EXIT_INVALID, PHSCommand
from phsid.core.systems import TimeGrid, cholesky_reduce
from phsid.data.files import load_model, save_signal_csv
from phsid.data.noise import NoiseSpec, generate_reference


class Command(PHSCommand):
    help = "Generate a noisy input signal and the reference output of a model."

    def add_arguments(self, parser):
        parser.add_argument("--model", required=True)
        parser.add_argument("--T", dest="t_end", type=float, default=1.0)
        parser.add_argument("--steps", type=int, default=1000)
        parser.add_argument(
            "--seed", type=int, default=None, help="Defaults to $PHSID_SEED."
        )
        parser.add_argument("--mean", type=float, default=1.0)
        parser.add_argument("--std", type=float, default=0.1)
        parser.add_argument("--out-u", required=True)
        parser.add_argument("--out-y", required=True)

    def handle(self, *args, **options):
        seed = options["seed"]
        if seed is None:
            seed = self.settings_seed()

        sys = cholesky_reduce(load_model(options["model"]))
        grid = TimeGrid(options["t_end"], options["steps"])
        spec = NoiseSpec(seed=seed, mean=options["mean"], std=options["std"])

        u, y_data = generate_reference(sys, grid, spec)
        save_signal_csv(options["out_u"], u, "u")
        save_signal_csv(options["out_y"], y_data, "y")
        self.stdout.write(
            f"Wrote {grid.steps + 1} samples to {options['out_u']} and {options['out_y']}."
        )

    def settings_seed(self) -> int:
        raw = settings.PHSID_SEED
        if raw is None:
            raise CommandError(
                "No seed given: pass --seed or set PHSID_SEED.", returncode=EXIT_INVALID
            )
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise CommandError(
                f"PHSID_SEED must be an integer, got {raw!r}.", returncode=EXIT_INVALID
            ) from None
