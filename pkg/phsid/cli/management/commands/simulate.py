import numpy as np

from phsid.cli.base import PHSCommand
from phsid.core.integrators import (
    energy_balance_residual,
    hamiltonian,
    scheme_output,
    simulate,
)
from phsid.core.systems import Scheme
from phsid.data.files import (
    load_model,
    load_signal_csv,
    save_energy_csv,
    save_signal_csv,
    save_trajectory_csv,
)


class Command(PHSCommand):
    help = "Simulate a model with explicit Euler or the discrete-gradient midpoint scheme."

    def add_arguments(self, parser):
        parser.add_argument("--model", required=True)
        parser.add_argument("--input", required=True)
        parser.add_argument(
            "--scheme", choices=[s.value for s in Scheme], default=Scheme.EULER.value
        )
        parser.add_argument("--out", required=True, help="State trajectory CSV.")
        parser.add_argument("--out-y", help="Output signal CSV.")
        parser.add_argument("--energy-out", help="Per-node energy and balance CSV.")

    def handle(self, *args, **options):
        sys = load_model(options["model"])
        u = load_signal_csv(options["input"])
        traj = simulate(sys, u, Scheme(options["scheme"]))

        save_trajectory_csv(options["out"], traj, "x")
        if options["out_y"]:
            save_signal_csv(options["out_y"], scheme_output(sys, traj), "y")

        if options["energy_out"]:
            residual = energy_balance_residual(sys, traj, u)
            save_energy_csv(
                options["energy_out"], traj.grid, hamiltonian(sys, traj), residual
            )
            self.stdout.write(f"Max |balance residual| = {np.max(np.abs(residual)):.3e}")

        self.stdout.write(f"Simulated {traj.grid.steps} {traj.scheme} steps.")
