#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <string>

#include "gaensim/crypto.hpp"
#include "gaensim/errors.hpp"

using namespace gaensim;

namespace {

std::map<std::string, std::string> load_vectors() {
    std::ifstream in(std::string(GAENSIM_FIXTURE_DIR) + "/crypto_vectors.txt");
    REQUIRE(in.good());
    std::map<std::string, std::string> vectors;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find(" = ");
        REQUIRE(eq != std::string::npos);
        vectors[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return vectors;
}

TemporaryExposureKey tek_from_hex(const std::string& hex, IntervalNumber start) {
    Bytes raw = from_hex(hex);
    REQUIRE(raw.size() == 16);
    TemporaryExposureKey tek;
    std::copy(raw.begin(), raw.end(), tek.key_bytes.begin());
    tek.rolling_start_interval = start;
    return tek;
}

std::string hex16(const ByteArray<16>& a) {
    return to_hex(std::span<const uint8_t>(a.data(), a.size()));
}

}  // namespace

TEST_CASE("frozen derivation chain for the all-zero key") {
    auto vectors = load_vectors();
    TemporaryExposureKey tek = tek_from_hex(vectors.at("a.tek"), 0);

    CHECK(hex16(derive_rpik(tek)) == vectors.at("a.rpik"));
    CHECK(hex16(derive_aemk(tek)) == vectors.at("a.aemk"));
    CHECK(hex16(derive_rpi(tek, 0)) == vectors.at("a.rpi.0"));
    CHECK(hex16(derive_rpi(tek, 143)) == vectors.at("a.rpi.143"));

    Aem aem = encrypt_metadata(tek, derive_rpi(tek, 0), Metadata{0x40, -20});
    CHECK(to_hex(std::span<const uint8_t>(aem.data(), 4)) ==
          vectors.at("a.aem.0.tx.-20"));
}

TEST_CASE("frozen derivation chain for a mid-epoch key") {
    auto vectors = load_vectors();
    TemporaryExposureKey tek = tek_from_hex(vectors.at("b.tek"), 2'592'000);

    CHECK(hex16(derive_rpik(tek)) == vectors.at("b.rpik"));
    CHECK(hex16(derive_aemk(tek)) == vectors.at("b.aemk"));
    CHECK(hex16(derive_rpi(tek, 2'592'071)) == vectors.at("b.rpi.2592071"));

    Aem aem = encrypt_metadata(tek, derive_rpi(tek, 2'592'071),
                               Metadata{0x40, 12});
    CHECK(to_hex(std::span<const uint8_t>(aem.data(), 4)) ==
          vectors.at("b.aem.2592071.tx.12"));
}

TEST_CASE("interval numbering floors to 10-minute windows") {
    CHECK(interval_number(0) == 0);
    CHECK(interval_number(599) == 0);
    CHECK(interval_number(600) == 1);
    CHECK(interval_number(86'400) == 144);
    CHECK(day_start_interval(0) == 0);
    CHECK(day_start_interval(143) == 0);
    CHECK(day_start_interval(144) == 144);
    CHECK(day_start_interval(2'592'071) == 2'592'000);
}

TEST_CASE("generate_tek requires day alignment and fills 16 random bytes") {
    Rng rng = make_stream(9, "tek-test");
    TemporaryExposureKey tek = generate_tek(rng, 288);
    CHECK(tek.rolling_start_interval == 288);
    CHECK(tek.rolling_period == 144);
    CHECK(tek.key_bytes != ByteArray<16>{});

    CHECK_THROWS_AS(generate_tek(rng, 100), ValidityError);

    Rng rng_a = make_stream(9, "tek-test");
    Rng rng_b = make_stream(9, "tek-test");
    CHECK(generate_tek(rng_a, 0).key_bytes == generate_tek(rng_b, 0).key_bytes);
}

TEST_CASE("a day of identifiers is 144 distinct values") {
    Rng rng = make_stream(4, "day");
    TemporaryExposureKey tek = generate_tek(rng, 144);
    std::vector<Rpi> rpis = rpis_for_day(tek);
    REQUIRE(rpis.size() == 144);
    std::set<Rpi> distinct(rpis.begin(), rpis.end());
    CHECK(distinct.size() == 144);
    CHECK(rpis[0] == derive_rpi(tek, 144));
    CHECK(rpis[143] == derive_rpi(tek, 287));
}

TEST_CASE("derive_rpi rejects intervals outside the key window") {
    Rng rng = make_stream(4, "window");
    TemporaryExposureKey tek = generate_tek(rng, 144);
    CHECK_THROWS_AS(derive_rpi(tek, 143), ValidityError);
    CHECK_THROWS_AS(derive_rpi(tek, 288), ValidityError);
    CHECK_NOTHROW(derive_rpi(tek, 144));
    CHECK_NOTHROW(derive_rpi(tek, 287));
}

TEST_CASE("metadata round-trips under the right key and not a wrong one") {
    Rng rng = make_stream(12, "aem");
    TemporaryExposureKey tek = generate_tek(rng, 0);
    TemporaryExposureKey other = generate_tek(rng, 0);
    Rpi rpi = derive_rpi(tek, 7);

    Metadata metadata{0x40, -3};
    Aem aem = encrypt_metadata(tek, rpi, metadata);
    CHECK(decrypt_metadata(tek, rpi, aem) == metadata);

    Metadata garbled = decrypt_metadata(other, rpi, aem);
    CHECK(garbled != metadata);
}

TEST_CASE("same interval under different keys gives different identifiers") {
    Rng rng = make_stream(31, "pair");
    TemporaryExposureKey a = generate_tek(rng, 0);
    TemporaryExposureKey b = generate_tek(rng, 0);
    CHECK(derive_rpi(a, 10) != derive_rpi(b, 10));
}

TEST_CASE("diagnosis key carries its validity window") {
    DiagnosisKey key;
    key.rolling_start_interval = 144;
    key.rolling_period = 144;
    CHECK(key.tek().covers(200));
    CHECK_FALSE(key.tek().covers(288));
    CHECK_FALSE(key.tek().covers(143));
}
