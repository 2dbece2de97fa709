#include <doctest.h>

#include <thread>

#include "migrado/conversion_cache.hpp"
#include "migrado/converters.hpp"
#include "migrado/error.hpp"
#include "migrado/image.hpp"
#include "migrado/subprocess.hpp"
#include "support/helpers.hpp"
#include "support/png_reader.hpp"

using namespace migrado;
namespace t = migrado::testing;
using namespace std::chrono_literals;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::invalid_config;
}

ConverterDescriptor external(std::string id, std::vector<std::string> command, const char* in = "text/plain",
                             const char* out = "text/x-upper") {
  ConverterDescriptor d{std::move(id), MediaType::parse(in), MediaType::parse(out)};
  d.version = "1";
  d.kind = ConverterKind::external_command;
  d.command = std::move(command);
  return d;
}

// Reverses the three escapes and strips the fixed wrapper.
std::optional<std::string> unwrap_html(const std::string& html) {
  const std::string head = "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"></head>\n<body><pre>";
  const std::string tail = "</pre></body>\n</html>\n";
  if (html.rfind(head, 0) != 0 || html.size() < head.size() + tail.size() ||
      html.compare(html.size() - tail.size(), tail.size(), tail) != 0) {
    return std::nullopt;
  }
  std::string inner = html.substr(head.size(), html.size() - head.size() - tail.size());
  std::string out;
  for (std::size_t i = 0; i < inner.size();) {
    if (inner[i] == '<' || inner[i] == '>') return std::nullopt;
    if (inner[i] == '&') {
      if (inner.compare(i, 5, "&amp;") == 0) {
        out += '&';
        i += 5;
      } else if (inner.compare(i, 4, "&lt;") == 0) {
        out += '<';
        i += 4;
      } else if (inner.compare(i, 4, "&gt;") == 0) {
        out += '>';
        i += 4;
      } else {
        return std::nullopt;
      }
    } else {
      out += inner[i++];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("identity converter") {
  auto body = to_bytes("abc");
  auto gif = MediaType::parse("image/gif");
  auto r = convert_identity({gif, gif, body});
  CHECK(r.body == body);
  CHECK(r.media_type == gif);
  CHECK(code_of([&] { convert_identity({gif, MediaType::parse("image/png"), body}); }) ==
        Errc::source_target_mismatch);
}

TEST_CASE("gif2png output decodes to the GIF's first frame") {
  for (const auto& name : t::gif_corpus()) {
    CAPTURE(name);
    auto r = convert_gif_to_png({MediaType::parse("image/gif"), MediaType::parse("image/png"), t::gif_fixture(name)});
    CHECK(r.media_type == MediaType::parse("image/png"));
    auto png = t::read_png(r.body);
    CHECK(sha256_hex(png.rgba) == t::gif_expectations()[name]["rgba_sha256"].get<std::string>());
    bool animated = t::gif_expectations()[name]["frames"].get<int>() > 1;
    CHECK(r.notes == (animated ? std::vector<std::string>{std::string(kAnimatedGifNote)} : std::vector<std::string>{}));
  }
}

TEST_CASE("gif2png rejects wrong types and bad input") {
  auto body = t::gif_fixture("fig1.gif");
  CHECK(code_of([&] { convert_gif_to_png({MediaType::parse("image/png"), MediaType::parse("image/png"), body}); }) ==
        Errc::source_target_mismatch);
  auto junk = to_bytes("GIF8");
  CHECK(code_of([&] { convert_gif_to_png({MediaType::parse("image/gif"), MediaType::parse("image/png"), junk}); }) ==
        Errc::malformed_input);
}

TEST_CASE("text2html escapes markup and round-trips through an unescaper") {
  auto run = [](const std::string& text) {
    auto body = to_bytes(text);
    return to_string(
        convert_text_to_html({MediaType::parse("text/plain"), MediaType::parse("text/html"), body}).body);
  };
  CHECK(run("a<b & c>d") ==
        "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"></head>\n<body><pre>a&lt;b &amp; c&gt;d</pre></body>\n"
        "</html>\n");
  std::mt19937_64 rng(9);
  const std::string alphabet = "ab<>&;\n \t\"'xyz";
  for (int i = 0; i < 300; ++i) {
    std::string text;
    for (std::size_t n = rng() % 200; n > 0; --n) text += alphabet[rng() % alphabet.size()];
    CAPTURE(text);
    CHECK(unwrap_html(run(text)) == text);
  }
  CHECK(unwrap_html(run("caf\xC3\xA9 \xFF!")) == "caf\xC3\xA9 \xEF\xBF\xBD!");
  CHECK(unwrap_html(run("\xED\xA0\x80")) == "\xEF\xBF\xBD\xEF\xBF\xBD\xEF\xBF\xBD");  // surrogate
}

TEST_CASE("run_process plumbing") {
  auto body = to_bytes("hello\n");
  auto r = run_process({"cat"}, body, 5s);
  CHECK(r.exited);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_bytes == body);

  auto big = Bytes(3 * 1024 * 1024, 'x');
  r = run_process({"cat"}, big, 10s);
  CHECK(r.stdout_bytes.size() == big.size());

  r = run_process({"sh", "-c", "echo oops >&2; exit 3"}, body, 5s);
  CHECK(r.exit_code == 3);
  CHECK(r.stderr_text == "oops\n");

  r = run_process({"sh", "-c", "kill -9 $$"}, body, 5s);
  CHECK_FALSE(r.exited);
  CHECK(r.signal == 9);

  // A child that ignores stdin must not wedge the parent.
  r = run_process({"true"}, big, 5s);
  CHECK(r.exited);

  CHECK_THROWS_AS(run_process({"/nonexistent/binary"}, body, 5s), Error);
}

TEST_CASE("external converters: success, crash, empty output, timeout") {
  auto body = to_bytes("some text");
  ConversionRequest req{MediaType::parse("text/plain"), MediaType::parse("text/x-upper"), body};

  auto upper = external("upper", {"tr", "a-z", "A-Z"});
  auto r = convert_external(upper, req, 5s);
  CHECK(to_string(r.body) == "SOME TEXT");
  CHECK(r.media_type == MediaType::parse("text/x-upper"));

  CHECK(code_of([&] { convert_external(external("f", {"false"}), req, 5s); }) == Errc::converter_crashed);
  CHECK(code_of([&] { convert_external(external("e", {"sh", "-c", "cat >/dev/null"}), req, 5s); }) ==
        Errc::empty_output);

  auto started = std::chrono::steady_clock::now();
  CHECK(code_of([&] { convert_external(external("s", {"sleep", "10"}), req, 300ms); }) == Errc::converter_timeout);
  auto elapsed = std::chrono::steady_clock::now() - started;
  CHECK(elapsed >= 300ms);
  CHECK(elapsed < 3s);
}

TEST_CASE("runner dispatches by descriptor and stamps the descriptor output type") {
  ConverterRunner runner;
  auto builtins = builtin_descriptors();
  REQUIRE(builtins.size() == 2);
  auto r = runner.run(builtins[0], MediaType::parse("image/gif"), t::gif_fixture("fig1.gif"));
  CHECK(r.media_type == builtins[0].output);
  CHECK(runner.invocations() == 1);

  auto ext = external("cat", {"cat"}, "image/gif", "image/x-copy");
  r = runner.run(ext, MediaType::parse("image/gif"), t::gif_fixture("fig1.gif"));
  CHECK(r.media_type == MediaType::parse("image/x-copy"));
  CHECK(r.body == t::gif_fixture("fig1.gif"));

  CHECK(code_of([&] { runner.run(builtins[0], MediaType::parse("image/png"), to_bytes("x")); }) ==
        Errc::source_target_mismatch);
  CHECK(code_of([&] { runner.run(builtins[0], MediaType::parse("image/gif"), Bytes{}); }) == Errc::malformed_input);
  CHECK(runner.invocations() == 2);

  ConverterDescriptor unknown{"mystery", MediaType::parse("image/gif"), MediaType::parse("image/png")};
  CHECK(code_of([&] { runner.run(unknown, MediaType::parse("image/gif"), to_bytes("x")); }) ==
        Errc::conversion_failed);
}

TEST_CASE("runner bounds concurrent external commands") {
  ConverterRunner runner(RunnerOptions{5s, 2});
  t::TempDir dir;
  // Each child records its start and end; with a limit of 2 no more than
  // two intervals may overlap.
  auto log = (dir / "log").string();
  auto d = external("slow", {"sh", "-c", "echo start >> " + log + "; sleep 0.2; echo end >> " + log + "; cat"});
  std::vector<std::thread> threads;
  for (int i = 0; i < 5; ++i)
    threads.emplace_back([&] { runner.run(d, MediaType::parse("text/plain"), to_bytes("x")); });
  for (auto& th : threads) th.join();
  std::ifstream in(log);
  int live = 0, peak = 0;
  for (std::string line; std::getline(in, line);) {
    live += line == "start" ? 1 : -1;
    peak = std::max(peak, live);
  }
  CHECK(peak <= 2);
  CHECK(peak >= 1);
  CHECK(runner.invocations() == 5);
}

TEST_CASE("conversions are deterministic across runs") {
  for (const auto& name : t::gif_corpus()) {
    auto body = t::gif_fixture(name);
    ConversionRequest req{MediaType::parse("image/gif"), MediaType::parse("image/png"), body};
    CHECK(convert_gif_to_png(req).body == convert_gif_to_png(req).body);
  }
}

TEST_CASE("conversion cache: hits, misses and the size bound") {
  ConversionCache cache(100);
  auto key = [](int i) { return CacheKey{"d" + std::to_string(i), "image/png", "gif2png", "1.0"}; };
  auto entry = [&](int i, std::size_t n) {
    return CacheEntry{key(i), std::make_shared<const Bytes>(n, static_cast<std::uint8_t>(i)), {}, {}};
  };
  CHECK_FALSE(cache.lookup(key(1)).has_value());
  cache.put(entry(1, 40));
  auto hit = cache.lookup(key(1));
  REQUIRE(hit);
  CHECK(*hit->body == Bytes(40, 1));
  cache.put(entry(2, 40));
  cache.lookup(key(1));  // 1 is now most recent
  cache.put(entry(3, 40));
  CHECK(cache.contains(key(1)));
  CHECK_FALSE(cache.contains(key(2)));
  CHECK(cache.contains(key(3)));
  CHECK(cache.total_bytes() == 80);
  cache.put(entry(4, 101));  // larger than the whole cache
  CHECK_FALSE(cache.contains(key(4)));
  CHECK(cache.total_bytes() == 80);

  ConversionCache off(0);
  off.put(entry(1, 1));
  CHECK(off.size() == 0);
}

TEST_CASE("conversion cache replays random traces like a reference LRU") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 50; ++round) {
    const std::size_t capacity = 50 + rng() % 200;
    ConversionCache cache(capacity);
    std::vector<std::pair<int, std::size_t>> model;  // front = most recent; (id, size)
    auto model_total = [&] {
      std::size_t s = 0;
      for (auto& [id, n] : model) s += n;
      return s;
    };
    for (int step = 0; step < 300; ++step) {
      int id = static_cast<int>(rng() % 12);
      CacheKey k{"d" + std::to_string(id), "t", "c", "1"};
      auto it = std::find_if(model.begin(), model.end(), [&](auto& e) { return e.first == id; });
      if (rng() % 2) {
        auto got = cache.lookup(k);
        CHECK(got.has_value() == (it != model.end()));
        if (it != model.end()) {
          auto e = *it;
          model.erase(it);
          model.insert(model.begin(), e);
        }
      } else {
        std::size_t n = 1 + rng() % 80;
        cache.put(CacheEntry{k, std::make_shared<const Bytes>(n, 0), {}, {}});
        // An entry bigger than the cache is dropped and the cache is left alone.
        if (n <= capacity) {
          if (it != model.end()) model.erase(it);
          model.insert(model.begin(), {id, n});
          while (model_total() > capacity) model.pop_back();
        }
      }
      CHECK(cache.total_bytes() == model_total());
      CHECK(cache.size() == model.size());
      CHECK(cache.total_bytes() <= capacity);
    }
  }
}
