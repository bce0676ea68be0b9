// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <httplib.h>

#include <random>

#include "colaboot/client_registry.hpp"
#include "colaboot/digest.hpp"
#include "colaboot/image_service.hpp"
#include "colaboot/synthetic.hpp"
#include "colaboot/udp_socket.hpp"
#include "test_support.hpp"

namespace colaboot::image {
namespace {

using store::AssetRole;

constexpr std::uint64_t kMiB = 1024 * 1024;

TEST(ResolveRange, Examples) {
  EXPECT_EQ(resolve_range(0, 1000000000ull, kMiB), (Slice{0, kMiB}));
  EXPECT_EQ(resolve_range(kMiB - 1, kMiB - 1, kMiB), (Slice{kMiB - 1, 1}));
  EXPECT_THROW(resolve_range(kMiB, std::nullopt, kMiB), RangeNotSatisfiable);
  EXPECT_THROW(resolve_range(kMiB, kMiB + 10, kMiB), RangeNotSatisfiable);
  EXPECT_EQ(resolve_range(10, std::nullopt, 100), (Slice{10, 90}));
  EXPECT_THROW(resolve_range(0, std::nullopt, 0), RangeNotSatisfiable);
}

TEST(ResolveRange, SuffixRanges) {
  EXPECT_EQ(resolve_range(ByteRange{std::nullopt, 100}, 1000), (Slice{900, 100}));
  EXPECT_EQ(resolve_range(ByteRange{std::nullopt, 5000}, 1000), (Slice{0, 1000}));
  EXPECT_THROW(resolve_range(ByteRange{std::nullopt, 0}, 1000), RangeNotSatisfiable);
}

// Brute force: the slice must cover exactly the bytes i with first <= i <= min(last, size-1).
TEST(ResolveRange, MatchesEnumeration) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    std::uint64_t size = rng() % 64;
    std::uint64_t first = rng() % 70;
    std::optional<std::uint64_t> last;
    if (rng() % 3) last = first + rng() % 80;
    std::vector<std::uint64_t> covered;
    for (std::uint64_t b = 0; b < size; ++b) {
      if (b >= first && (!last || b <= *last)) covered.push_back(b);
    }
    if (covered.empty()) {
      EXPECT_THROW(resolve_range(first, last, size), RangeNotSatisfiable);
    } else {
      auto s = resolve_range(first, last, size);
      EXPECT_EQ(s.offset, covered.front());
      EXPECT_EQ(s.length, covered.size());
    }
  }
}

TEST(RangeHeader, Parsing) {
  EXPECT_EQ(parse_range_header("bytes=0-1023"), (ByteRange{0, 1023}));
  EXPECT_EQ(parse_range_header("bytes=500-"), (ByteRange{500, std::nullopt}));
  EXPECT_EQ(parse_range_header("bytes=-500"), (ByteRange{std::nullopt, 500}));
  EXPECT_EQ(parse_range_header(" Bytes = 7 - 9 "), (ByteRange{7, 9}));
  EXPECT_EQ(parse_range_header("items=0-1"), std::nullopt);
  EXPECT_EQ(parse_range_header("bytes=9-7"), std::nullopt);
  EXPECT_EQ(parse_range_header("bytes=x-1"), std::nullopt);
  EXPECT_THROW(parse_range_header("bytes=0-1,5-9"), RangeNotSatisfiable);
}

class ServeImageTest : public ::testing::Test {
 protected:
  void SetUp() override {
    image_ = sim::prng_bytes(11, kMiB);
    fx_.install(1, {{"pxelinux.0", AssetRole::kBootloader, sim::prng_bytes(1, 1000)},
                    {"vmlinuz", AssetRole::kKernel, sim::prng_bytes(2, 3000)},
                    {"initrd.img", AssetRole::kInitrd, sim::prng_bytes(3, 5000)},
                    {"dir/with space.bin", AssetRole::kConfig, sim::prng_bytes(4, 10)},
                    {"os-image.sqfs", AssetRole::kImage, image_}});
  }

  ImageResponse get(std::string path, std::optional<ByteRange> range = {}, std::string method = "GET") {
    ImageRequest r;
    r.method = std::move(method);
    r.path = std::move(path);
    r.range = range;
    return serve_image(r, fx_.store.open_snapshot());
  }

  std::vector<std::uint8_t> body(const ImageResponse& r) {
    std::vector<std::uint8_t> out(r.slice.length);
    r.blob->read(r.slice.offset, out);
    return out;
  }

  colaboot::testing::StoreFixture fx_;
  std::vector<std::uint8_t> image_;
};

TEST_F(ServeImageTest, FullBody) {
  auto r = get("/assets/os-image.sqfs");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(*r.header("content-length"), std::to_string(kMiB));
  EXPECT_EQ(*r.header("X-Asset-Digest"), sha256_hex(image_));
  EXPECT_EQ(*r.header("X-Manifest-Version"), "1");
  EXPECT_EQ(sha256_hex(body(r)), sha256_hex(image_));
  EXPECT_EQ(r.role, AssetRole::kImage);
}

TEST_F(ServeImageTest, FirstKibibyte) {
  auto r = get("/assets/os-image.sqfs", ByteRange{0, 1023});
  EXPECT_EQ(r.status, 206);
  EXPECT_EQ(r.body_length(), 1024u);
  EXPECT_EQ(*r.header("Content-Range"), "bytes 0-1023/1048576");
  EXPECT_EQ(body(r), std::vector<std::uint8_t>(image_.begin(), image_.begin() + 1024));
}

TEST_F(ServeImageTest, OutOfRange) {
  auto r = get("/assets/os-image.sqfs", ByteRange{1000000000000ull, 1000000000000ull});
  EXPECT_EQ(r.status, 416);
  EXPECT_EQ(*r.header("Content-Range"), "bytes */1048576");
  EXPECT_EQ(r.body_length(), 0u);
}

TEST_F(ServeImageTest, ClampedLastByte) {
  auto r = get("/assets/os-image.sqfs", ByteRange{kMiB - 10, 1000000000ull});
  EXPECT_EQ(r.status, 206);
  EXPECT_EQ(r.body_length(), 10u);
}

TEST_F(ServeImageTest, MultiRangeRejected) {
  ImageRequest req;
  req.path = "/assets/os-image.sqfs";
  req.multi_range = true;
  EXPECT_EQ(serve_image(req, fx_.store.open_snapshot()).status, 416);
}

TEST_F(ServeImageTest, NotFoundAndEscapes) {
  EXPECT_EQ(get("/assets/vmlinux").status, 404);
  EXPECT_EQ(get("/assets/../ACTIVE").status, 404);
  EXPECT_EQ(get("/assets/%2e%2e/ACTIVE").status, 404);
  EXPECT_EQ(get("/objects/abc").status, 404);
  EXPECT_EQ(get("/assets/dir/with%20space.bin").status, 200);
}

TEST_F(ServeImageTest, NonReadMethods) {
  for (const char* m : {"POST", "PUT", "DELETE", "PATCH"}) {
    auto r = get("/assets/os-image.sqfs", {}, m);
    EXPECT_EQ(r.status, 405) << m;
    EXPECT_EQ(*r.header("Allow"), "GET, HEAD");
  }
  EXPECT_EQ(get("/assets/os-image.sqfs", {}, "HEAD").status, 200);
}

TEST_F(ServeImageTest, ManifestEndpoint) {
  auto r = get("/manifest");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(store::parse_manifest(r.text), fx_.store.open_snapshot().manifest());
}

// Over the wire.
class ImageServerTest : public ServeImageTest {
 protected:
  void SetUp() override {
    ServeImageTest::SetUp();
    store_view_ = std::make_shared<store::AssetStore>(fx_.store.root());
    registry_ = std::make_unique<ClientRegistry>(store_view_);
    service_ = std::make_unique<ImageService>(*registry_, [this](session::BootEvent e) {
      std::lock_guard lock(mu_);
      events_.push_back(std::move(e));
    });
    service_->bind(Ipv4Address(127, 0, 0, 1), 0);
    service_->start();
  }
  void TearDown() override { service_->stop(); }

  httplib::Client client() {
    httplib::Client c("127.0.0.1", service_->port());
    c.set_keep_alive(true);
    return c;
  }

  std::shared_ptr<store::AssetStore> store_view_;
  std::unique_ptr<ClientRegistry> registry_;
  std::unique_ptr<ImageService> service_;
  std::mutex mu_;
  std::vector<session::BootEvent> events_;
};

TEST_F(ImageServerTest, FullGetMatchesDigest) {
  auto c = client();
  auto res = c.Get("/assets/os-image.sqfs");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body.size(), kMiB);
  EXPECT_EQ(sha256_hex(res->body), res->get_header_value("X-Asset-Digest"));
  EXPECT_EQ(res->get_header_value("ETag"), "\"" + sha256_hex(image_) + "\"");
}

TEST_F(ImageServerTest, HeadHasNoBody) {
  auto c = client();
  auto res = c.Head("/assets/os-image.sqfs");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_TRUE(res->body.empty());
  EXPECT_EQ(res->get_header_value("Content-Length"), std::to_string(kMiB));
}

TEST_F(ImageServerTest, MultiRangeOverWireIs416) {
  auto c = client();
  auto res = c.Get("/assets/os-image.sqfs", {{"Range", "bytes=0-1,4-5"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 416);
}

TEST_F(ImageServerTest, PostIs405) {
  auto c = client();
  auto res = c.Post("/assets/os-image.sqfs", "x", "text/plain");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 405);
}

TEST_F(ImageServerTest, RandomPartitionsReassembleToFullBody) {
  auto c = client();
  auto full = c.Get("/assets/os-image.sqfs");
  ASSERT_TRUE(full);
  std::mt19937_64 rng(17);
  for (int round = 0; round < 8; ++round) {
    std::string joined;
    std::uint64_t pos = 0;
    while (pos < kMiB) {
      std::uint64_t len = 1 + rng() % (kMiB / 5);
      std::uint64_t last = std::min(pos + len, kMiB) - 1;
      auto res = c.Get("/assets/os-image.sqfs",
                       {{"Range", "bytes=" + std::to_string(pos) + "-" + std::to_string(last)}});
      ASSERT_TRUE(res);
      ASSERT_EQ(res->status, 206);
      joined += res->body;
      pos = last + 1;
    }
    ASSERT_EQ(joined, full->body) << "round " << round;
  }
}

TEST_F(ImageServerTest, SessionHintKeepsVersionAcrossSync) {
  const std::string mac = "02:c0:1b:00:00:07";
  auto c = client();
  httplib::Headers hint{{std::string(kClientHintHeader), mac}};
  auto first = c.Get("/assets/os-image.sqfs", hint);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->get_header_value("X-Manifest-Version"), "1");

  fx_.install(2, {{"pxelinux.0", AssetRole::kBootloader, sim::prng_bytes(1, 1000)},
                  {"vmlinuz", AssetRole::kKernel, sim::prng_bytes(2, 3000)},
                  {"initrd.img", AssetRole::kInitrd, sim::prng_bytes(3, 5000)},
                  {"os-image.sqfs", AssetRole::kImage, sim::prng_bytes(12, kMiB)}});
  ASSERT_EQ(fx_.store.active_version(), 2u);

  for (int i = 0; i < 3; ++i) {
    auto res = c.Get("/assets/os-image.sqfs", {{std::string(kClientHintHeader), mac},
                                              {"Range", "bytes=0-4095"}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->get_header_value("X-Manifest-Version"), "1");
    EXPECT_EQ(res->body, std::string(first->body.substr(0, 4096)));
  }
  auto other = c.Get("/assets/os-image.sqfs", {{std::string(kClientHintHeader), "02:c0:1b:00:00:08"}});
  ASSERT_TRUE(other);
  EXPECT_EQ(other->get_header_value("X-Manifest-Version"), "2");
}

TEST_F(ImageServerTest, ImageEventsFireOncePerBoot) {
  auto c = client();
  httplib::Headers hint{{std::string(kClientHintHeader), "02:c0:1b:00:00:01"}};
  ASSERT_TRUE(c.Get("/assets/os-image.sqfs", hint));
  ASSERT_TRUE(c.Get("/assets/vmlinuz", hint));
  std::lock_guard lock(mu_);
  ASSERT_EQ(events_.size(), 2u);
  EXPECT_EQ(events_[0].kind, session::EventKind::kImageFirstByte);
  EXPECT_EQ(events_[1].kind, session::EventKind::kImageComplete);
  EXPECT_EQ(events_[1].size, kMiB);
  EXPECT_EQ(events_[1].manifest_version, 1u);
}

TEST(ImageServiceBind, PortInUse) {
  colaboot::testing::StoreFixture fx;
  auto view = std::make_shared<store::AssetStore>(fx.store.root());
  ClientRegistry registry(view);
  ImageService a(registry, {});
  a.bind(Ipv4Address(127, 0, 0, 1), 0);
  ImageService b(registry, {});
  try {
    b.bind(Ipv4Address(127, 0, 0, 1), a.port());
    FAIL();
  } catch (const PortInUse& e) {
    EXPECT_EQ(e.port(), a.port());
  }
}

}  // namespace
}  // namespace colaboot::image
