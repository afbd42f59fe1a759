#include <gtest/gtest.h>

#include <random>

#include "claimflow/entities.hpp"
#include "oracles.hpp"

using namespace claimflow;
using namespace claimflow::nlu;

using claimflow::oracles::brute_force_imei;

TEST(Imei, KnownValues) {
    EXPECT_TRUE(validate_imei("490154203237518").valid());
    EXPECT_EQ(validate_imei("490154203237519").fault, ImeiFault::checksum_failed);
    EXPECT_EQ(validate_imei("49015420323751").fault, ImeiFault::wrong_length);
    EXPECT_EQ(validate_imei("49015420323751X").fault, ImeiFault::non_digit);
}

TEST(Imei, MatchesBruteForceOnRandomStrings) {
    std::mt19937 rng(20240510);
    std::uniform_int_distribution<int> digit(0, 9);
    for (int n = 0; n < 10000; ++n) {
        std::string s;
        for (int i = 0; i < 15; ++i) s += static_cast<char>('0' + digit(rng));
        ASSERT_EQ(validate_imei(s).valid(), brute_force_imei(s)) << s;
        ASSERT_EQ(Imei::parse(s).has_value(), brute_force_imei(s)) << s;
    }
}

TEST(Imei, SingleDigitChangeBreaksChecksum) {
    const std::string good = "490154203237518";
    for (std::size_t i = 0; i < good.size(); ++i) {
        for (char c = '0'; c <= '9'; ++c) {
            if (c == good[i]) continue;
            auto s = good;
            s[i] = c;
            EXPECT_FALSE(validate_imei(s).valid()) << s;
        }
    }
}

TEST(Luhn, RejectsEmptyAndNonDigits) {
    EXPECT_FALSE(luhn_valid(""));
    EXPECT_FALSE(luhn_valid("79927398a"));
    EXPECT_TRUE(luhn_valid("79927398713"));
}

TEST(EntityJson, RoundTripsEveryKind) {
    const std::vector<EntityValue> values{
        DateTimeValue{*parse_timestamp("2024-05-09"), Granularity::day},
        DamageType::water_damage,
        PhoneModel{"Galaxy S9"},
        *Imei::parse("490154203237518"),
        PhoneNumber{"00491512345678"},
        TextValue{"fell on the street"},
    };
    for (const auto& v : values) EXPECT_EQ(entity_from_json(to_json(v)), v);
}

TEST(EntityJson, RejectsInvalidImei) {
    auto j = to_json(EntityValue{*Imei::parse("490154203237518")});
    j["value"] = "490154203237519";
    EXPECT_THROW(entity_from_json(j), Error);
}

TEST(Timestamps, ParseAndFormat) {
    const auto t = parse_timestamp("2024-05-10T09:00:00Z");
    ASSERT_TRUE(t);
    EXPECT_EQ(format_timestamp(*t), "2024-05-10T09:00:00Z");
    EXPECT_EQ(format_date(*t), "2024-05-10");
    EXPECT_FALSE(parse_timestamp("2024-13-01"));
    EXPECT_FALSE(parse_timestamp("yesterday"));
}
