// usage: node validate_glb.js <gltf-validator dir> <file.glb>
const fs = require('fs');
const validator = require(process.argv[2]);

const data = new Uint8Array(fs.readFileSync(process.argv[3]));
validator.validateBytes(data).then((report) => {
  const issues = report.issues;
  console.log(`errors ${issues.numErrors}, warnings ${issues.numWarnings}, infos ${issues.numInfos}`);
  for (const m of issues.messages) {
    if (m.severity <= 1) console.log(`${m.severity === 0 ? 'error' : 'warning'} ${m.code} ${m.pointer || ''}: ${m.message}`);
  }
  process.exit(issues.numErrors === 0 ? 0 : 1);
}, (err) => {
  console.error(err);
  process.exit(1);
});
