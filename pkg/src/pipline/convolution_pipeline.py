import sys
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src import __version__
from src.components.freeharm import (SubordinationSolver, deformed_typeB, free_convolve,
                                     perturbation_typeB, typeB_convolve)
from src.entity.artifact_entity import ConvolutionArtifact
from src.entity.config_entity import ConvolutionConfig
from src.entity.measure import (ZERO_MEASURE, Atom, Measure, PerturbationSpec, SignedMeasure,
                                SubordinationPair, TypeBDistribution)
from src.exception import BandRMTException
from src.logger import logging
from src.utils.main_utils import utc_timestamp, write_csv_file, write_json_file


def _atom_records(atom_list: Sequence[Atom]) -> list:
    return [{"x": loc, "weight": weight} for loc, weight in atom_list]


class ConvolutionPipeline:
    """
    Runs a free or type B convolution on the configured grid and writes
    density.csv, atoms.json and manifest.json.
    """

    def __init__(self, convolution_config: Optional[ConvolutionConfig] = None):
        self.convolution_config = convolution_config or ConvolutionConfig()

    def max_residual(self, pair: SubordinationPair) -> float:
        """Largest subordination residual over the grid at the finest eta."""
        grid = self.convolution_config.grid
        eta = grid.eta_ladder[-1]
        worst = 0.0
        for x in grid.points:
            worst = max(worst, *pair.residual(complex(x, eta)))
        logging.info(f"Maximum subordination residual on the grid: {worst:.3e}")
        return float(worst)

    def write_outputs(self, frame: pd.DataFrame, atoms: Dict[str, Sequence[Atom]],
                      max_residual: float, echo: Dict) -> ConvolutionArtifact:
        """
        Method Name :   write_outputs
        Description :   Writes the density table, the atom list and the manifest

        Output      :   Returns convolution artifact
        On Failure  :   Write an exception log and then raise an exception
        """
        try:
            config = self.convolution_config
            write_csv_file(config.density_file_path, frame)
            write_json_file(config.atoms_file_path, {key: _atom_records(value) for key, value in atoms.items()})
            grid = config.grid
            write_json_file(config.manifest_file_path, {
                "inputs": echo,
                "grid": {"lo": grid.lo, "hi": grid.hi, "n": grid.n, "eta_ladder": list(grid.eta_ladder)},
                "threads": config.threads,
                "max_residual": max_residual,
                "version": __version__,
                "timestamp": utc_timestamp(),
            })
            return ConvolutionArtifact(
                density_file_path=config.density_file_path,
                atoms_file_path=config.atoms_file_path,
                manifest_file_path=config.manifest_file_path,
                max_residual=max_residual,
                atoms=list(atoms.get("mu", ())),
                nu_atoms=list(atoms.get("nu", ())),
            )
        except BandRMTException:
            raise
        except Exception as e:
            raise BandRMTException(e, sys) from e

    def start_free_convolution(self, mu1: Measure, mu2: Measure, echo: Optional[Dict] = None) -> ConvolutionArtifact:
        """
        This method of ConvolutionPipeline class computes mu1 boxplus mu2 on the grid
        """
        try:
            logging.info("Entered the start_free_convolution method of ConvolutionPipeline class")
            config = self.convolution_config
            result, pair = free_convolve(mu1, mu2, config.grid, config.threads)
            x, density = result.grid
            frame = pd.DataFrame({"x": x, "density": density, "err": result.grid_error})
            artifact = self.write_outputs(frame, {"mu": result.atoms}, self.max_residual(pair),
                                          dict(echo or {}, operation="convolve"))
            logging.info("Exited the start_free_convolution method of ConvolutionPipeline class")
            return artifact
        except BandRMTException:
            raise
        except Exception as e:
            raise BandRMTException(e, sys) from e

    def start_typeB(self, mu: Measure, pert: PerturbationSpec, base_nu: SignedMeasure = ZERO_MEASURE,
                    echo: Optional[Dict] = None) -> ConvolutionArtifact:
        """
        This method of ConvolutionPipeline class computes the type B law of ``mu``
        (with infinitesimal part ``base_nu``) deformed by ``pert``.

        A semicircle base goes through the closed-form check of deformed_typeB;
        any other base is convolved numerically only.
        """
        try:
            logging.info("Entered the start_typeB method of ConvolutionPipeline class")
            config = self.convolution_config
            if mu.kind == "semicircle":
                law = deformed_typeB(mu.param("sigma"), base_nu, pert, config.grid, config.threads)
            else:
                law = typeB_convolve(TypeBDistribution(mu=mu, nu=base_nu), perturbation_typeB(pert),
                                     config.grid, config.threads)

            x, mu_density = law.mu.grid
            _, nu_density = law.nu.grid
            frame = pd.DataFrame({
                "x": x,
                "density": mu_density,
                "err": law.mu.grid_error,
                "nu_density": nu_density,
                "nu_err": law.nu.grid_error if law.nu.grid_error is not None else np.zeros_like(x),
            })
            solver = SubordinationSolver(mu, perturbation_typeB(pert).mu)
            artifact = self.write_outputs(frame, {"mu": law.mu.atoms, "nu": law.nu.atoms},
                                          self.max_residual(solver.pair()),
                                          dict(echo or {}, operation="typeb"))
            logging.info("Exited the start_typeB method of ConvolutionPipeline class")
            return artifact
        except BandRMTException:
            raise
        except Exception as e:
            raise BandRMTException(e, sys) from e
