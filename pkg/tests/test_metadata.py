import random
from datetime import datetime, timedelta, timezone

from pkgvet.metadata.analyzer import (
    MetadataConfig,
    analyze_metadata,
    correlate_known_malware,
    cross_registry_check,
    find_typosquats,
)
from pkgvet.model import (
    Dependency,
    DepKind,
    FileEntry,
    FileKind,
    PackageCoordinate,
    PackageMetadata,
    Registry,
    SubjectLanguage,
)
from pkgvet.registry.clients import MalwareRecord, PopularPackage
from tests.oracles import edit_distance_naive

UTC = timezone.utc
CFG = MetadataConfig(popularity_floor=1000)


def coord(name, registry=Registry.NPM, version="1.0.0"):
    return PackageCoordinate(registry, name, version)


def meta_for(c, authors=("mal",), deps=(), when=None, files=()):
    return PackageMetadata(
        coordinate=c,
        authors=tuple(authors),
        release_time=when or datetime(2024, 6, 1, tzinfo=UTC),
        downloads=10,
        declared_deps=tuple(deps),
        subject_language=SubjectLanguage.JS,
        file_inventory=tuple(files),
    )


POPULAR = [
    PopularPackage("cross-env", 5_000_000, ("kentc",)),
    PopularPackage("lodash", 40_000_000, ("jdalton",)),
    PopularPackage("tiny", 500, ("smallfry",)),  # below the floor
]


def test_crossenv_style_hit():
    hits = find_typosquats(coord("crossenv"), ("mal",), POPULAR, CFG)
    assert hits == (("cross-env", 1),)


def test_popular_package_itself_not_flagged():
    assert find_typosquats(coord("lodash"), ("anyone",), POPULAR, CFG) == ()


def test_same_author_near_miss_not_flagged():
    hits = find_typosquats(coord("lodahs"), ("jdalton",), POPULAR, CFG)
    assert hits == ()


def test_below_floor_target_ignored():
    # "tinyy" is distance 1 from "tiny" but tiny is not popular enough
    assert find_typosquats(coord("tinyy"), ("mal",), POPULAR, CFG) == ()


def test_threshold_scales_with_length():
    popular = [PopularPackage("requests-toolbelt", 2_000_000, ("kr",))]
    # two edits allowed on a long name
    hits = find_typosquats(coord("requests-toolbet", Registry.PYPI), ("x",), popular, CFG)
    assert hits and hits[0][1] <= 2
    # but only one on a short name
    popular_short = [PopularPackage("vue", 9_000_000, ("yy",))]
    assert find_typosquats(coord("vx", Registry.NPM), ("x",), popular_short, CFG) == ()


def test_reordering_popular_list_is_irrelevant():
    rng = random.Random(3)
    shuffled = POPULAR[:]
    rng.shuffle(shuffled)
    a = find_typosquats(coord("crossenv"), ("mal",), POPULAR, CFG)
    b = find_typosquats(coord("crossenv"), ("mal",), shuffled, CFG)
    assert a == b


def test_no_hit_exceeds_threshold_fuzz():
    rng = random.Random(17)
    names = ["pkg" + "".join(rng.choice("abcdef") for _ in range(rng.randrange(1, 8))) for _ in range(30)]
    popular = [PopularPackage(n, 1_000_000, ("someone",)) for n in names]
    for _ in range(100):
        subject = "pkg" + "".join(rng.choice("abcdef") for _ in range(rng.randrange(1, 8)))
        c = coord(subject)
        for name, d in find_typosquats(c, ("mal",), popular, CFG):
            assert d <= CFG.threshold_for(c.name)
            assert edit_distance_naive(c.name, name) <= d


def test_cross_registry_masking():
    indexes = {
        Registry.PYPI: {"shared-name": {"alice"}},
        Registry.RUBYGEMS: {"shared-name": {"mal"}},
    }
    hits = cross_registry_check(coord("shared-name"), ("mal",), indexes)
    assert ("pypi", "shared-name", True) in hits
    # same author on rubygems → match reported but no mismatch
    assert ("rubygems", "shared-name", False) in hits
    assert cross_registry_check(coord("unique-name"), ("mal",), indexes) == ()


MALWARE = [
    MalwareRecord(
        coordinate=coord("evil-pkg", Registry.NPM, "0.1.0"),
        authors=("darkhat",),
        release_time=datetime(2024, 6, 3, tzinfo=UTC),
    )
]


def test_shared_author_relation():
    m = meta_for(coord("other"), authors=("darkhat",), when=datetime(2023, 1, 1, tzinfo=UTC))
    rels = correlate_known_malware(m.coordinate, m, MALWARE, CFG)
    assert rels == (("npm:evil-pkg:0.1.0", "SHARED_AUTHOR"),)


def test_depends_on_relation():
    m = meta_for(
        coord("leaf"),
        deps=[Dependency("evil-pkg", "*", DepKind.RUNTIME)],
        when=datetime(2023, 1, 1, tzinfo=UTC),
    )
    rels = correlate_known_malware(m.coordinate, m, MALWARE, CFG)
    assert ("npm:evil-pkg:0.1.0", "DEPENDS_ON") in rels


def test_dev_dep_on_malware_not_a_relation():
    m = meta_for(
        coord("leaf"),
        deps=[Dependency("evil-pkg", "*", DepKind.DEV)],
        when=datetime(2023, 1, 1, tzinfo=UTC),
    )
    assert correlate_known_malware(m.coordinate, m, MALWARE, CFG) == ()


def test_release_window_relation():
    # released 3 days after the malware, window 7 → related
    m = meta_for(coord("sametime"), when=datetime(2024, 6, 6, tzinfo=UTC))
    rels = correlate_known_malware(m.coordinate, m, MALWARE, CFG)
    assert rels == (("npm:evil-pkg:0.1.0", "RELEASE_WINDOW"),)
    # 9 days after → unrelated
    m2 = meta_for(coord("latecomer"), when=datetime(2024, 6, 12, tzinfo=UTC))
    assert correlate_known_malware(m2.coordinate, m2, MALWARE, CFG) == ()
    # window is configurable
    wide = MetadataConfig(popularity_floor=1000, release_window_days=30)
    assert correlate_known_malware(m2.coordinate, m2, MALWARE, wide) != ()


def test_malware_entry_is_not_related_to_itself():
    m = meta_for(coord("evil-pkg", Registry.NPM, "0.1.0"), authors=("darkhat",),
                 when=datetime(2024, 6, 3, tzinfo=UTC))
    assert correlate_known_malware(m.coordinate, m, MALWARE, CFG) == ()


def test_analyze_metadata_binary_flags_and_determinism():
    elf = FileEntry("bin/miner", 1024, FileKind.ELF_BINARY, "7F454C4602010100")
    pe = FileEntry("tool.dat", 2048, FileKind.PE_BINARY, "4D5A900003000000")
    src = FileEntry("index.js", 10, FileKind.SOURCE, "6D6F64756C652E65")
    m = meta_for(coord("withbin"), files=(elf, pe, src))
    f1 = analyze_metadata(m, POPULAR, {}, MALWARE, CFG)
    f2 = analyze_metadata(m, POPULAR, {}, MALWARE, CFG)
    assert f1 == f2
    assert {b.path for b in f1.binary_flags} == {"bin/miner", "tool.dat"}
    assert f1.to_dict() == f2.to_dict()


def test_findings_round_trip():
    from pkgvet.metadata.analyzer import MetadataFindings

    m = meta_for(coord("crossenv"), authors=("darkhat",), when=datetime(2024, 6, 3, tzinfo=UTC))
    f = analyze_metadata(m, POPULAR, {Registry.PYPI: {"crossenv": {"bob"}}}, MALWARE, CFG)
    assert MetadataFindings.from_dict(f.to_dict()) == f
