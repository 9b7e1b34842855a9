"""Base pydantic model for bioinverse records and configuration."""

from pydantic import BaseModel, ConfigDict


class BioinverseModel(BaseModel):
    """Base pydantic model for bioinverse types."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class BioinverseRecord(BaseModel):
    """Base model for records written to disk; unknown keys are kept."""

    model_config = ConfigDict(extra="allow")


__all__ = ["BioinverseModel", "BioinverseRecord", "ConfigDict"]
