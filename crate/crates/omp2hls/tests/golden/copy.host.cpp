// host driver emitted by omp2hls
#include <CL/opencl.hpp>
#include <algorithm>
#include <cstdint>
#include <vector>
#include "omp2hls_runtime.hpp"

using omp2hls::context;
using omp2hls::program;
using omp2hls::queue;

void main(double* a, double* b) { // op 0
  const int64_t v18 = 0; // op 1
  std::vector<int64_t> v19_storage(1); int64_t* v19 = v19_storage.data(); // op 2
  v19[0] = v18; // op 3
  std::vector<int64_t> v20_storage(1); int64_t* v20 = v20_storage.data(); // op 4
  v20[0] = v18; // op 5
  const int64_t v2 = 0; // op 6
  const int64_t v3 = 100; // op 7
  const int64_t v4 = 1; // op 8
  const int64_t v12 = v3 - v2; // op 9
  cl::Buffer v13 = omp2hls::create_buffer(context, "a", 1, v12 * sizeof(double)); // op 10
  const int64_t v21 = v19[0]; // op 11
  const int64_t v22 = 1; // op 12
  const int64_t v23 = v21 + v22; // op 13
  v19[0] = v23; // op 14
  omp2hls::acquire("a", 1); // op 15
  cl::Event v14; queue.enqueueWriteBuffer(v13, CL_FALSE, 0, v13.getInfo<CL_MEM_SIZE>(), a, nullptr, &v14); // op 16
  v14.wait(); // op 17
  const int64_t v15 = v3 - v2; // op 18
  cl::Buffer v16 = omp2hls::create_buffer(context, "b", 1, v15 * sizeof(double)); // op 19
  const int64_t v24 = v20[0]; // op 20
  const int64_t v25 = 1; // op 21
  const int64_t v26 = v24 + v25; // op 22
  v20[0] = v26; // op 23
  omp2hls::acquire("b", 1); // op 24
  cl::Kernel v33(program, "my_kernel"); v33.setArg(0, v13); v33.setArg(1, v16); // op 25
  queue.enqueueTask(v33); // op 26
  queue.finish(); // op 27
  const int64_t v27 = v19[0]; // op 28
  const int64_t v28 = 1; // op 29
  const int64_t v29 = v27 - v28; // op 30
  v19[0] = v29; // op 31
  omp2hls::release("a", 1); // op 32
  cl::Event v17; queue.enqueueReadBuffer(v16, CL_FALSE, 0, v16.getInfo<CL_MEM_SIZE>(), b, nullptr, &v17); // op 33
  v17.wait(); // op 34
  const int64_t v30 = v20[0]; // op 35
  const int64_t v31 = 1; // op 36
  const int64_t v32 = v30 - v31; // op 37
  v20[0] = v32; // op 38
  omp2hls::release("b", 1); // op 39
  return; // op 40
} // op 0
