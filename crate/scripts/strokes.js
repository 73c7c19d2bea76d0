// Reads one character per line on stdin, prints "<char>\t<stroke names joined by ,>".
// Requires: npm install cnchar cnchar-order
const cnchar = require('cnchar');
cnchar.use(require('cnchar-order'));

const input = require('fs').readFileSync(0, 'utf8');
const out = [];
for (const ch of input.split('\n')) {
  if (!ch) continue;
  const names = cnchar.stroke(ch, 'order', 'name')[0];
  if (Array.isArray(names) && names.length > 0 && names.every((n) => typeof n === 'string')) {
    out.push(`${ch}\t${names.join(',')}`);
  }
}
process.stdout.write(out.join('\n') + '\n');
