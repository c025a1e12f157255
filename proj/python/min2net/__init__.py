"""Python front end for the native MIN2Net core."""

from ._min2net import (
    BatchCompositionError,
    ConfigError,
    DimensionError,
    IntegrityError,
    IoError,
    Model,
    NumericError,
    augment,
    butter_bandpass,
    filtfilt,
    metrics,
    mine_triplets,
    read_dataset,
    read_raw,
    read_raw_manifest,
    resample,
    run_cli,
    synth,
    triplet_loss,
    write_dataset,
    write_raw,
    write_raw_directory,
)

__version__ = "0.1.0"


def main(argv=None):
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
