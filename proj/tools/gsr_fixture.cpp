// Writes the synthetic fixture room as a scene bundle, optionally with a
// depth-scaled copy for exercising `gsr align`.

#include <gsr/scene/bundle_io.hpp>
#include <gsr/synth/room.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Render the synthetic fixture room into a scene bundle"};
  std::string out_dir, scaled_dir;
  gsr::synth::FixtureOptions opt;
  int num = 17, den = 10;
  app.add_option("output", out_dir, "Bundle directory to write")->required();
  app.add_option("--frames", opt.frames, "Number of frames")->capture_default_str();
  app.add_option("--width", opt.image_width, "Image width")->capture_default_str();
  app.add_option("--height", opt.image_height, "Image height")->capture_default_str();
  app.add_option("--focal", opt.focal, "Focal length in pixels")->capture_default_str();
  app.add_option("--scaled-copy", scaled_dir,
                 "Also write a copy whose depths are den/num of the fixture's (fixture depths snap to num mm)");
  app.add_option("--scale-num", num, "Numerator of the planted scale")->capture_default_str();
  app.add_option("--scale-den", den, "Denominator of the planted scale")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    if (!scaled_dir.empty()) opt.depth_quantum_mm = num;
    const auto bundle = gsr::synth::make_fixture_room(opt);
    gsr::write_bundle(bundle, out_dir);
    std::cout << "wrote " << out_dir << " (" << bundle.frames.size() << " frames, " << bundle.objects.size()
              << " objects)\n";
    if (!scaled_dir.empty()) {
      gsr::write_bundle(gsr::synth::scaled_depth_copy(bundle, num, den), scaled_dir);
      std::cout << "wrote " << scaled_dir << " (planted scale " << num << "/" << den << ")\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
