#!/usr/bin/env python3
"""Fetch and normalize the evaluation datasets into data/.

Time series come from the UEA multivariate archive hosted at
timeseriesclassification.com; BasicMotions, RacketSports, and ERing ship
as equal-length .ts files and are copied verbatim. JapaneseVowels is
variable-length upstream (7 to 29 samples), so every channel is padded to
29 samples by repeating its last value and the header is rewritten as
equal-length.

Tabular datasets come from the ARFF mirrors of the UCI soybean (large,
683 instances) and mushroom (8124 instances) sets. The ARFF data section
is converted to a headerless CSV with the class in the last column;
missing values stay as the literal token `?`.

Every produced file is checked against a pinned SHA-256; a mismatch is
reported as a warning since upstream archives occasionally reformat.
"""

import argparse
import hashlib
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

UEA_ZIP = "https://timeseriesclassification.com/aeon-toolkit/{name}.zip"
ARFF_RAW = (
    "https://raw.githubusercontent.com/renatopp/arff-datasets/master/"
    "classification/{name}.arff"
)

COPY_DATASETS = ["BasicMotions", "RacketSports", "ERing"]
PADDED_DATASET = "JapaneseVowels"
PADDED_LENGTH = 29
ARFF_DATASETS = ["soybean", "mushroom"]

EXPECTED_SHA256 = {
    "uea/BasicMotions_TRAIN.ts": "3dcb66b389ba93ed2de7879bceb27548e0ea7a5ffb59888d0db36b59af2a0e28",
    "uea/BasicMotions_TEST.ts": "ea93ab9f58faa6869c18bbe16a6dca0b02f174aa676af7568788a1a2a8e7e8da",
    "uea/RacketSports_TRAIN.ts": "f5374faaaf6a1aad9ca2ec26d0e39ba61f26b8a6d6bf1766a691027c1ca6f023",
    "uea/RacketSports_TEST.ts": "c8179bbde0e45f41218ce4a46258524ae7abca7d0e7e45f4424a23d1b1d98d8d",
    "uea/ERing_TRAIN.ts": "582d9d14bcda44a4bb4b7dc37bb210df70b57e4bf030245ebf1c28ae7e59edab",
    "uea/ERing_TEST.ts": "2399c7d2bc7d8b57466441e9f499afdace7ff8353b8ebff090799b22aaa8f812",
    "uea/JapaneseVowels_TRAIN.ts": "72b8db22661c8fc32ae86800d099547eced5435a31c8448eef5ef2215c2c5575",
    "uea/JapaneseVowels_TEST.ts": "2a342f1e5ac9d0c01da1c3c4b341ca2647175d4cf197d42cfe67d4f7c2eeac7c",
    "tabular/soybean.csv": "1f824243d755acb83eb3bb24e1ddb7a8ec25298949ce05ddb7ffacd90fc9259c",
    "tabular/mushroom.csv": "acfa25eca940983ec40d764a632d292d49e35ee9de0996c547aa4de349d0a842",
}


def fetch(url: str) -> bytes:
    print(f"downloading {url}")
    with urllib.request.urlopen(url) as resp:
        return resp.read()


def ts_members(archive: zipfile.ZipFile, name: str) -> dict:
    """Locate <name>_TRAIN.ts / <name>_TEST.ts regardless of zip layout."""
    found = {}
    for member in archive.namelist():
        base = member.rsplit("/", 1)[-1]
        if base in (f"{name}_TRAIN.ts", f"{name}_TEST.ts"):
            found[base] = member
    missing = {f"{name}_TRAIN.ts", f"{name}_TEST.ts"} - set(found)
    if missing:
        raise SystemExit(f"{name}.zip is missing {sorted(missing)}")
    return found


def pad_japanese_vowels(text: str) -> str:
    """Equalize channel lengths by repeating each channel's last sample."""
    problem_name = PADDED_DATASET
    class_label = None
    data = []
    in_data = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if in_data:
            channels = line.split(":")
            label = channels.pop()
            padded = []
            for channel in channels:
                samples = channel.split(",")
                if len(samples) > PADDED_LENGTH:
                    raise SystemExit(
                        f"channel of length {len(samples)} exceeds pad target"
                    )
                samples += [samples[-1]] * (PADDED_LENGTH - len(samples))
                padded.append(",".join(samples))
            data.append(":".join(padded + [label]))
            continue
        lowered = line.lower()
        if lowered == "@data":
            in_data = True
        elif lowered.startswith("@problemname"):
            problem_name = line.split(None, 1)[1]
        elif lowered.startswith("@classlabel"):
            class_label = line.split(None, 1)[1]
    if class_label is None or not data:
        raise SystemExit("unexpected JapaneseVowels layout")

    dimensions = data[0].count(":")
    header = [
        f"@problemName {problem_name}",
        "@timeStamps false",
        "@missing false",
        "@univariate false",
        f"@dimensions {dimensions}",
        "@equalLength true",
        f"@seriesLength {PADDED_LENGTH}",
        f"@classLabel {class_label}",
        "@data",
    ]
    return "\n".join(header + data) + "\n"


def arff_to_csv(text: str) -> str:
    """Keep the ARFF data section as-is, minus value quoting."""
    rows = []
    in_data = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            values = [v.strip().strip("'") for v in line.split(",")]
            rows.append(",".join(values))
        elif line.lower() == "@data":
            in_data = True
    if not rows:
        raise SystemExit("ARFF file has no data section")
    return "\n".join(rows) + "\n"


def write_checked(path: Path, contents: bytes, data_dir: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(contents)
    rel = path.relative_to(data_dir).as_posix()
    digest = hashlib.sha256(contents).hexdigest()
    expected = EXPECTED_SHA256.get(rel)
    if expected and digest != expected:
        print(f"warning: {rel} hash {digest[:12]}… differs from the pinned build", file=sys.stderr)
    print(f"wrote {rel} ({len(contents)} bytes)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--data-dir",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "data",
        help="output directory (default: <repo>/data)",
    )
    parser.add_argument(
        "--force",
        action="store_true",
        help="re-download even when the target files already exist",
    )
    args = parser.parse_args()
    uea_dir = args.data_dir / "uea"
    tabular_dir = args.data_dir / "tabular"

    for name in COPY_DATASETS + [PADDED_DATASET]:
        targets = [uea_dir / f"{name}_{split}.ts" for split in ("TRAIN", "TEST")]
        if not args.force and all(t.exists() for t in targets):
            print(f"skipping {name}: already present")
            continue
        archive = zipfile.ZipFile(io.BytesIO(fetch(UEA_ZIP.format(name=name))))
        for base, member in ts_members(archive, name).items():
            text = archive.read(member).decode("utf-8")
            if name == PADDED_DATASET:
                text = pad_japanese_vowels(text)
            write_checked(uea_dir / base, text.encode("utf-8"), args.data_dir)

    for name in ARFF_DATASETS:
        target = tabular_dir / f"{name}.csv"
        if not args.force and target.exists():
            print(f"skipping {name}: already present")
            continue
        csv = arff_to_csv(fetch(ARFF_RAW.format(name=name)).decode("utf-8"))
        write_checked(target, csv.encode("utf-8"), args.data_dir)


if __name__ == "__main__":
    main()
