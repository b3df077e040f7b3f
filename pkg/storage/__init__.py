"""Persistence: CSV data files, JSON results and key-value settings."""
from storage.files import atomic_write
from storage.records import (
    dumps_json,
    experiment_frame,
    load_curves,
    load_dataset,
    read_coefficient,
    read_curves,
    read_responses,
    write_coefficient,
    write_dataset,
    write_experiment_csv,
    write_json,
)
from storage.settings import Setting, parse_settings, read_settings

__all__ = [
    'atomic_write',
    'dumps_json',
    'experiment_frame',
    'load_curves',
    'load_dataset',
    'read_coefficient',
    'read_curves',
    'read_responses',
    'write_coefficient',
    'write_dataset',
    'write_experiment_csv',
    'write_json',
    'Setting',
    'parse_settings',
    'read_settings',
]
