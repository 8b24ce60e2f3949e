#include <gtest/gtest.h>

#include "gpsr/digest.hpp"
#include "gpsr/text.hpp"

namespace gpsr {
namespace {

TEST(Text, NormalizeLowersAndCollapsesWhitespace) {
  EXPECT_EQ(text::normalize("  Living\t ROOM \n"), "living room");
  EXPECT_EQ(text::normalize(""), "");
}

TEST(Text, WordCountSplitsOnAnyWhitespace) {
  EXPECT_EQ(text::word_count("one  two\nthree"), 3u);
  EXPECT_EQ(text::word_count("   "), 0u);
}

TEST(Text, ReplaceAndCount) {
  EXPECT_EQ(text::replace_all("a-b-c", "-", "+"), "a+b+c");
  EXPECT_EQ(text::count_occurrences("follow(x) follow(y)", "follow"), 2u);
}

TEST(Digest, KnownSha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

}  // namespace
}  // namespace gpsr
