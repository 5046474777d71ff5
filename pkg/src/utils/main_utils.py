import json
import os
import sys
from datetime import datetime, timezone

import dill
import numpy as np
import yaml
from pandas import DataFrame

from src.exception import BandRMTException, NumericalSolverError
from src.logger import logging


def read_yaml_file(file_path: str) -> dict:
    try:
        with open(file_path, "rb") as yaml_file:
            return yaml.safe_load(yaml_file)

    except Exception as e:
        raise BandRMTException(e, sys) from e


def load_object(file_path: str) -> object:
    """
    Returns a pickled object (e.g. a RunSummary) from disk.
    file_path: str location of file to load
    """
    try:
        with open(file_path, "rb") as file_obj:
            obj = dill.load(file_obj)
        return obj
    except Exception as e:
        raise NumericalSolverError(e, sys) from e


def save_object(file_path: str, obj: object) -> None:
    logging.info("Entered the save_object method of utils")

    try:
        os.makedirs(os.path.dirname(file_path) or ".", exist_ok=True)
        with open(file_path, "wb") as file_obj:
            dill.dump(obj, file_obj)

        logging.info("Exited the save_object method of utils")

    except Exception as e:
        raise NumericalSolverError(e, sys) from e


def to_jsonable(value):
    """Recursively converts numpy scalars/arrays, tuples and fractions into JSON-friendly values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def write_json_file(file_path: str, content: dict) -> None:
    """
    Writes UTF-8 JSON with sorted keys so that manifests diff cleanly.
    """
    try:
        os.makedirs(os.path.dirname(file_path) or ".", exist_ok=True)
        with open(file_path, "w", encoding="utf-8", newline="\n") as file_obj:
            json.dump(to_jsonable(content), file_obj, indent=2, sort_keys=True)
            file_obj.write("\n")
    except Exception as e:
        raise NumericalSolverError(e, sys) from e


def dumps_json(content: dict) -> str:
    return json.dumps(to_jsonable(content), indent=2, sort_keys=True)


def write_csv_file(file_path: str, dataframe: DataFrame) -> None:
    """
    Writes a header-first CSV with '.' decimals and LF line endings.
    """
    try:
        os.makedirs(os.path.dirname(file_path) or ".", exist_ok=True)
        dataframe.to_csv(file_path, index=False, header=True, lineterminator="\n")
        logging.info(f"Wrote {len(dataframe)} rows to {file_path}")
    except Exception as e:
        raise NumericalSolverError(e, sys) from e


def dumps_csv(dataframe: DataFrame) -> str:
    return dataframe.to_csv(index=False, header=True, lineterminator="\n")


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
