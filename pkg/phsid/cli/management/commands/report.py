import numpy as np

from phsid.cli.base import PHSCommand
from phsid.data.files import load_history_csv, load_result, load_series_csv


class Command(PHSCommand):
    help = "Summarize a calibration run from its history and output-difference files."

    def add_arguments(self, parser):
        parser.add_argument("--history", required=True)
        parser.add_argument("--diff", required=True)
        parser.add_argument("--result", help="Result JSON written by calibrate.")

    def handle(self, *args, **options):
        history = load_history_csv(options["history"])
        _, diff = load_series_csv(options["diff"])

        last = history[-1]
        self.stdout.write(f"final cost:      {last.cost:.6e}")
        self.stdout.write(f"iterations:      {last.iter}")
        if last.grad_norm2 is not None:
            self.stdout.write(f"last |g|^2:      {last.grad_norm2:.6e}")
        self.stdout.write(f"max |dy|:        {np.max(np.abs(diff)):.6e}")

        if options["result"]:
            point, summary = load_result(options["result"])
            self.stdout.write(f"stop reason:     {summary.get('reason', 'unknown')}")
            self.stdout.write(f"R eigenvalues:   {np.linalg.eigvalsh(point.R.entries)}")
            self.stdout.write(f"x_hat:           {point.w_hat}")
