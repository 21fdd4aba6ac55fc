"""Inequality catalog, random instances and fuzz campaigns."""

from .campaign import (
    CampaignConfig,
    CampaignReport,
    FuzzReport,
    Instance,
    add_window_names,
    build_instance,
    check_record,
    fuzz_campaign,
    record_members,
    replay,
)
from .catalog import CATALOG, RECORDS, InequalityRecord, get_record
from .generate import gen_invertible, gen_pd, gen_unit_vector

__all__ = [
    "CATALOG",
    "CampaignConfig",
    "CampaignReport",
    "FuzzReport",
    "InequalityRecord",
    "Instance",
    "RECORDS",
    "add_window_names",
    "build_instance",
    "check_record",
    "fuzz_campaign",
    "gen_invertible",
    "gen_pd",
    "gen_unit_vector",
    "get_record",
    "record_members",
    "replay",
]
