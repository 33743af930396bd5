"""
System parameter sets for the energy-latency model.

SystemParams bundles the compression-side and channel-side parameters and is
the single source of truth for every physical constant of a run.
"""

from dataclasses import dataclass, replace

from elo_tradeoff.comm_model import (
    ChannelParams,
    avg_snr,
    energy_efficiency,
    outage_rate,
    packet_time,
)
from elo_tradeoff.comp_model import CompressionParams
from elo_tradeoff.unit_converters import db_to_linear, dbm_to_watt, linear_to_db, watt_to_dbm


@dataclass(frozen=True)
class SystemParams:
    """
    Physical parameters of one sensor / base-station link.

    The compression parameters hold the computation side (block size, Gamma
    complexity model, CPU frequencies and power); the channel parameters hold
    the radio side (power, bandwidth, path loss, noise, hardware energy
    coefficients, outage target and packet size).
    """

    comp: CompressionParams
    chan: ChannelParams

    def print_summary(self) -> None:
        """Print a summary of the parameter set and the derived link quantities."""
        comp, chan = self.comp, self.chan
        print(f"\n{'='*60}")
        print("System Parameters")
        print(f"{'='*60}")

        print(f"\n{'Computation':-^40}")
        print(f"{'D [bit]':<22} {comp.D:<14.6g}")
        print(f"{'kappa':<22} {comp.kappa:<14.6g}")
        print(f"{'psi':<22} {comp.psi:<14.6g}")
        print(f"{'zeta':<22} {comp.zeta:<14.6g}")
        print(f"{'f_c range [GHz]':<22} {comp.fc_min / 1e9:.3f} - {comp.fc_max / 1e9:.3f}")
        print(f"{'Ps_max [W]':<22} {comp.Ps_max:<14.6g}")
        print(f"{'f_b [GHz]':<22} {comp.f_b / 1e9:<14.6g}")
        print(f"{'Q_max':<22} {comp.Q_max:<14.6g}")

        print(f"\n{'Channel':-^40}")
        print(f"{'P_tx [W]':<22} {chan.P_tx:<14.6g}")
        print(f"{'B [MHz]':<22} {chan.B / 1e6:<14.6g}")
        print(f"{'d [m]':<22} {chan.d:<14.6g}")
        print(f"{'ell':<22} {chan.ell:<14.6g}")
        print(f"{'N0 [dBm/Hz]':<22} {watt_to_dbm(chan.N0):<14.6g}")
        print(f"{'K0 [dB]':<22} {linear_to_db(chan.K0):<14.6g}")
        print(f"{'nu [J]':<22} {chan.nu:<14.6g}")
        print(f"{'lambda [J/bit]':<22} {chan.lambda_coef:<14.6g}")
        print(f"{'eps':<22} {chan.eps:<14.6g}")
        print(f"{'n_p [bit]':<22} {chan.n_p:<14d}")

        print(f"\n{'Derived':-^40}")
        print(f"{'gamma0':<22} {avg_snr(chan):<14.6g}")
        print(f"{'R(eps) [bit/s]':<22} {outage_rate(chan):<14.6g}")
        print(f"{'t_p [s]':<22} {packet_time(chan):<14.6g}")
        print(f"{'eta [bit/J]':<22} {energy_efficiency(chan):<14.6g}")
        print()


class SystemParamsFactory:
    """Factory for the named parameter sets."""

    @classmethod
    def create_nominal(cls) -> SystemParams:
        """
        Literal reading of the simulation parameter table.

        P_tx sits at the top of its 0.05-1.5 W range and d = 1000 m. Under
        this reading gamma0 is about 3e-3, the outage rate only a few hundred
        bit/s, and typical energy and latency budgets are infeasible.
        """
        return SystemParams(
            comp=CompressionParams(
                D=0.5e6,
                kappa=1.25,
                psi=3.5,
                zeta=0.05,
                fc_min=0.8e9,
                fc_max=2.5e9,
                Ps_max=1.0,
                f_b=2.5e9,
                Q_max=1.5,
            ),
            chan=ChannelParams(
                P_tx=1.5,
                B=100e6,
                d=1000.0,
                ell=2.0,
                N0=dbm_to_watt(-110.0),
                K0=db_to_linear(-27.0),
                nu=1e-14,
                lambda_coef=1e-15,
                eps=0.001,
                n_p=1000,
            ),
        )

    @classmethod
    def create_default(cls) -> SystemParams:
        """
        Calibrated operating point used by default.

        Same as create_nominal() except P_tx = 0.3 W and d = 8 m, which put the
        outage rate near 1.34 Mbit/s and the full-compression transmit energy
        near 0.075 J.
        """
        nominal = cls.create_nominal()
        return replace(nominal, chan=replace(nominal.chan, P_tx=0.3, d=8.0))

    @classmethod
    def create(cls, name: str) -> SystemParams:
        """Create a parameter set by name ("default" or "nominal")."""
        builders = {"default": cls.create_default, "nominal": cls.create_nominal}
        if name not in builders:
            raise ValueError(f"Unknown parameter set: {name}. Available: {sorted(builders)}")
        return builders[name]()
