import sys
from typing import Optional

import pandas as pd

from src.components.rmtsim import histogram, run_experiment
from src.entity.artifact_entity import RunSummary, SimulationArtifact
from src.entity.config_entity import EnsembleSpec, SimulationConfig
from src.exception import BandRMTException
from src.logger import logging
from src.utils.main_utils import save_object, utc_timestamp, write_csv_file, write_json_file


class SimulationPipeline:
    def __init__(self, ensemble_spec: EnsembleSpec, simulation_config: Optional[SimulationConfig] = None):
        """
        :param ensemble_spec: Banded ensemble, deformation, seed and number of realizations
        :param simulation_config: Output location, statistic kind and histogram settings
        """
        self.ensemble_spec = ensemble_spec
        self.simulation_config = simulation_config or SimulationConfig()

    @staticmethod
    def realizations_frame(summary: RunSummary) -> pd.DataFrame:
        return pd.DataFrame([(r.rep, r.lambda1, r.F) for r in summary.records],
                            columns=["rep", "lambda1", "F"])

    def start_simulation(self) -> RunSummary:
        """
        This method of SimulationPipeline class runs the Monte Carlo experiment
        """
        try:
            logging.info("Entered the start_simulation method of SimulationPipeline class")
            summary = run_experiment(self.ensemble_spec, kind=self.simulation_config.kind,
                                     threads=self.simulation_config.threads)
            logging.info("Exited the start_simulation method of SimulationPipeline class")
            return summary
        except BandRMTException:
            raise
        except Exception as e:
            raise BandRMTException(e, sys) from e

    def write_outputs(self, summary: RunSummary) -> SimulationArtifact:
        """
        Method Name :   write_outputs
        Description :   Writes the per-realization CSV, the histogram CSV, the JSON manifest
                        and the pickled summary into the artifact directory

        Output      :   Returns simulation artifact
        On Failure  :   Write an exception log and then raise an exception
        """
        try:
            config = self.simulation_config
            write_csv_file(config.realizations_file_path, self.realizations_frame(summary))

            values = [r.F for r in summary.records]
            if values:
                write_csv_file(config.histogram_file_path,
                               histogram(values, config.histogram_bins, config.histogram_range))
            else:
                logging.warning("No realizations: histogram skipped")

            manifest = dict(summary.manifest)
            manifest.update({
                "aggregates": {
                    "mean": summary.mean,
                    "variance": summary.variance,
                    "ks_distance": summary.ks_distance,
                    "lambda1_mean": summary.lambda1_mean,
                },
                "preset": config.preset,
                "threads": config.threads,
                "timestamp": utc_timestamp(),
            })
            write_json_file(config.manifest_file_path, manifest)
            save_object(config.summary_object_file_path, summary)

            simulation_artifact = SimulationArtifact(
                realizations_file_path=config.realizations_file_path,
                histogram_file_path=config.histogram_file_path,
                manifest_file_path=config.manifest_file_path,
                summary_object_file_path=config.summary_object_file_path,
                summary=summary,
            )
            logging.info(f"Simulation artifact: {simulation_artifact.manifest_file_path}")
            return simulation_artifact
        except BandRMTException:
            raise
        except Exception as e:
            raise BandRMTException(e, sys) from e

    def run_pipeline(self) -> SimulationArtifact:
        """
        This method of SimulationPipeline class is responsible for running complete pipeline
        """
        summary = self.start_simulation()
        return self.write_outputs(summary)
