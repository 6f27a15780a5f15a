"""
JSON schema of run configuration files (schema version 1.0).
"""

MERGE_MODES = ("concat_mlp", "add", "attention")
NARRATOR_MODES = ("remote", "prompt_free", "fixture")

_nullable_string = {"type": ["string", "null"]}

RUN_CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema_version", "dataset", "narrator", "encoder", "fusion", "train", "output_dir", "seed"],
    "properties": {
        "schema_version": {
            "type": "string",
            "const": "1.0",
            "description": "Schema version 1.0",
        },
        "base_profile": {
            "type": "string",
            "description": "Profile this file patches, relative to a profile directory",
        },
        "dataset": {
            "type": "object",
            "required": ["train", "embeddings"],
            "properties": {
                "train": _nullable_string,
                "val": _nullable_string,
                "splits": {
                    "type": "object",
                    "additionalProperties": _nullable_string,
                    "description": "Evaluation manifests by split name",
                },
                "embeddings": _nullable_string,
                "embedding_limit": {"type": ["integer", "null"], "minimum": 1},
                "max_snippets": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "narrator": {
            "type": "object",
            "required": ["mode", "cache_dir", "interval"],
            "properties": {
                "mode": {"type": "string", "minLength": 1},
                "model": _nullable_string,
                "endpoint": _nullable_string,
                "prompt": _nullable_string,
                "parallelism": {"type": "integer", "minimum": 1},
                "num_retries": {"type": "integer", "minimum": 0},
                "timeout": {"type": "number", "exclusiveMinimum": 0},
                "temperature": {"type": "number", "minimum": 0},
                "max_tokens": {"type": "integer", "minimum": 1},
                "frames_dir": _nullable_string,
                "frame_pattern": _nullable_string,
                "fixture_path": _nullable_string,
                "cache_dir": {"type": "string", "minLength": 1},
                "interval": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "encoder": {
            "type": "object",
            "properties": {
                "d": {"type": "integer", "minimum": 1},
                "heads": {"type": "integer", "minimum": 1},
                "dropout": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "merge_mode": {"type": "string", "enum": list(MERGE_MODES)},
                "layer_norm": {"type": "boolean"},
                "narrative_merge": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "fusion": {
            "type": "object",
            "properties": {
                "alpha": {"type": "number", "minimum": 0},
                "paragraph_branch": {"type": "boolean"},
                "separate_branch_losses": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "train": {
            "type": "object",
            "properties": {
                "epochs": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 1},
                "learning_rate": {"type": "number", "minimum": 0},
                "grad_clip": {"type": "number", "exclusiveMinimum": 0},
                "lambda_h": {"type": "number", "minimum": 0},
                "expansion_iou_threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "val_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            },
            "additionalProperties": False,
        },
        "eval_splits": {
            "type": ["array", "null"],
            "items": {"type": "string"},
        },
        "output_dir": {"type": "string", "minLength": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}
