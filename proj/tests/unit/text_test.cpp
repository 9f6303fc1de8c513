#include <gtest/gtest.h>

#include "nsplan/text.hpp"

using namespace nsplan;

TEST(Text, WordTokensLowercaseAndSplitOnPunctuation) {
  EXPECT_EQ(word_tokens("Walk to the Bathroom."), (std::vector<std::string>{"walk", "to", "the", "bathroom"}));
  EXPECT_EQ(word_tokens("  "), std::vector<std::string>{});
  EXPECT_EQ(word_tokens("a-b_c"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Text, Fnv1aPublishedVectors) {
  // Reference values of the 64-bit FNV-1a test suite.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(fingerprint_hex(""), "cbf29ce484222325");
}

TEST(Text, FingerprintIsZeroPadded) {
  auto fp = fingerprint_hex("Task: Watch TV\nStep 1:");
  EXPECT_EQ(fp.size(), 16u);
  EXPECT_EQ(fp, "f9cc65e6a963e6b2");
}

TEST(Text, KeyToSurfaceAndJoin) {
  EXPECT_EQ(key_to_surface("take_out_your_clothes"), "take out your clothes");
  EXPECT_EQ(join_steps({"a", "b c"}), "a. b c");
  EXPECT_EQ(join_steps({}), "");
  EXPECT_EQ(trim("\t x y \n"), "x y");
}
